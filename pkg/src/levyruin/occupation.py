"""Poissonian occupation times below 0: transforms and the infinite-horizon law.

The occupation time accrues, within each negative excursion, from the first Poisson
observation epoch finding the surplus negative until the excursion's recovery to 0.
This module provides

* the joint transform of (first passage above b, occupation accrued until then),
* the Laplace transform of the total occupation over an infinite horizon,
* the kernels Gamma_lam and Lambda' built on Kendall's identity, and
* the full law of the infinite-horizon occupation time: an atom at 0 plus a density.

Numerical note: Gamma_lam(r) grows like psi'(Phi_lam) e^{lam r} (its Laplace
transform 1/(Phi_p - Phi_lam) has a pole at p = lam), so the textbook density
formula is a catastrophic cancellation at large r.  The density here is evaluated
through the compensated kernel

    G(r) = Gamma_lam(r) - psi'(Phi_lam) e^{lam r} = (1/r) E[X_r^- e^{Phi_lam X_r}] >= 0

(split E[X_r e^{Phi_lam X_r}] = r psi'(Phi_lam) e^{lam r} over the two half-lines),
a stable integral over the negative half-line, combined with the Laplace identity
int_0^inf e^{-lam s} Lambda'(x, s) ds = (Phi_lam/lam) Z(x, Phi_lam) - W(x).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .models import BROWNIAN, LevyModel, _psi_prime_any, phi, transition
from .quadrature import gl_adaptive, gl_fixed
from .scale import ScaleContext, scale_context, z, z_tilde, _w_prime_vec
from .util import clamp_unit

_NEG_DENSITY_CLAMP = 1e-9
_CONV_TOL = 1e-7  # adaptive tolerance of the density convolution


def joint_lt_upcross(model: LevyModel, x: float, b: float, q: float, p: float,
                     lam: float) -> float:
    """E_x[ e^{-q tau_b^+ - p O_{tau_b^+, lam}} ; tau_b^+ < inf ]  for x <= b.

    Ratio of divided-difference scale functions at (Phi_{lam+q}, Phi_{p+q}); the
    p = lam confluence routes through the confluent branch automatically.
    """
    if x > b:
        raise DomainError("joint_lt_upcross requires x <= b")
    if lam <= 0.0:
        raise DomainError("joint_lt_upcross requires lam > 0")
    if p < 0.0 or q < 0.0:
        raise DomainError("joint_lt_upcross requires p >= 0 and q >= 0")
    ctx = scale_context(model, q)
    a1 = phi(model, lam + q)
    a2 = phi(model, p + q)
    val = z_tilde(ctx, x, a1, a2) / z_tilde(ctx, b, a1, a2)
    return clamp_unit(val, "joint_lt_upcross")


def lt_occupation_inf(model: LevyModel, x: float, p: float, lam: float) -> float:
    """E_x[ e^{-p O_{inf, lam}} ]; requires E[X_1] > 0."""
    model.require_positive_drift("lt_occupation_inf")
    if p <= 0.0 or lam <= 0.0:
        raise DomainError("lt_occupation_inf requires p > 0 and lam > 0")
    ctx0 = scale_context(model, 0.0)
    php = phi(model, p)
    phl = phi(model, lam)
    val = model.mean() * (php * phl / (lam * p)) * z_tilde(ctx0, x, phl, php)
    return clamp_unit(val, "lt_occupation_inf")


def _kernel_windows(model: LevyModel, r: float, phi_lam: float):
    # window for integrals over the negative half-line: the transition density's
    # own support bound when it reaches below 0, else (large r, support shifted
    # right) the exponentially damped far-tail region the tilt can still see
    td = transition(model, r)
    if td.lower < -1e-6:
        neg_lo = td.lower
    else:
        neg_lo = -(45.0 / max(phi_lam, 1e-2) + 1.0)
    return td, neg_lo


def gamma_lambda(model: LevyModel, lam: float, r: float) -> float:
    """Kernel Gamma_lam(r) = int_0^inf e^{Phi_lam z} (z/r) P(X_r in dz).

    Quadrature against the transition law, including the Cramer-Lundberg atom at
    c*r.  Grows like psi'(Phi_lam) e^{lam r}; intended for moderate r.
    """
    if r <= 0.0:
        raise DomainError("gamma_lambda requires r > 0")
    if lam <= 0.0:
        raise DomainError("gamma_lambda requires lam > 0")
    ph = phi(model, lam)
    td = transition(model, r)
    total = 0.0
    if td.atom_location is not None and td.atom_location > 0.0:
        total += td.atom_mass * math.exp(ph * td.atom_location) * td.atom_location / r

    def f(zz):
        return np.exp(ph * zz) * (zz / r) * td.density(zz)

    hi = td.tilted_upper(ph)
    if hi > 0.0:
        total += gl_adaptive(f, 0.0, hi, tol_abs=1e-12, tol_rel=1e-10)
    return total


def _gamma_comp(model: LevyModel, lam: float, phi_lam: float, r: float) -> float:
    # G(r) = (1/r) E[X_r^- e^{Phi_lam X_r}] = Gamma_lam(r) - psi'(Phi_lam) e^{lam r}
    td, lo = _kernel_windows(model, r, phi_lam)

    def f(zz):
        return np.exp(phi_lam * zz) * (-zz / r) * td.density(zz)

    return gl_fixed(f, lo, 0.0, 256)


def _lambda_prime_point(model: LevyModel, ctx0: ScaleContext, x: float, r: float) -> float:
    td = transition(model, r)
    lo = max(0.0, -x)
    total = 0.0
    if td.atom_location is not None:
        loc = td.atom_location
        if loc > lo and x + loc > 0.0:
            total += td.atom_mass * _w_prime_vec(ctx0, np.array([x + loc]))[0] * loc / r
    if ctx0.phi_q == 0.0 and ctx0.zeta_q > 0.0:
        hi = min(td.upper, lo + 90.0 / ctx0.zeta_q)
    else:
        hi = td.tilted_upper(ctx0.phi_q)
    if hi <= lo:
        return total

    def f(zz):
        return _w_prime_vec(ctx0, x + zz) * (zz / r) * td.density(zz)

    return total + gl_fixed(f, lo, hi, 256)


def lambda_prime(model: LevyModel, x: float, r: float) -> float:
    """Kernel Lambda'(x, r) = int W'(x+z) (z/r) P(X_r in dz) over z > max(0, -x)."""
    if r <= 0.0:
        raise DomainError("lambda_prime requires r > 0")
    ctx0 = scale_context(model, 0.0)
    return _lambda_prime_point(model, ctx0, x, r)


@dataclass
class OccupationLaw:
    """Law of the infinite-horizon Poissonian occupation time from level x.

    ``atom_at_zero`` is the mass of {O = 0} (= the probability the surplus is
    never observed negative); ``density`` is the absolutely continuous part,
    evaluated exactly at query points.  ``decay_rate`` is the exponential decay
    rate of the density tail (distance from 0 to the nearest singularity of the
    law's Laplace transform), used by the tail-truncation rule.
    """

    atom_at_zero: float
    density: Callable[[float], float]
    model: LevyModel = field(repr=False)
    x: float = 0.0
    lam: float = 0.0
    decay_rate: float = 0.0

    def suggested_r_max(self, tail_eps: float = 1e-3) -> float:
        return (math.log(1.0 / tail_eps) + 5.0) / self.decay_rate


def _transform_decay_rate(model: LevyModel) -> float:
    if model.kind == BROWNIAN:
        return model.mu ** 2 / (2.0 * model.sigma ** 2)
    return (math.sqrt(model.c * model.alpha) - math.sqrt(model.eta)) ** 2


def occupation_law(model: LevyModel, x: float, lam: float) -> OccupationLaw:
    """Atom-plus-density law of O_{inf, lam} started from x; requires E[X_1] > 0."""
    model.require_positive_drift("occupation_law")
    if lam <= 0.0:
        raise DomainError("occupation_law requires lam > 0")
    ctx0 = scale_context(model, 0.0)
    ph = phi(model, lam)
    psip = _psi_prime_any(model, ph)
    mean = model.mean()
    atom = mean * (ph / lam) * z(ctx0, x, ph)
    atom = clamp_unit(atom, "occupation atom")

    def lam_prime_vec(s_arr: np.ndarray) -> np.ndarray:
        return np.array([_lambda_prime_point(model, ctx0, x, float(s)) for s in s_arr])

    def gamma_comp_vec(u_arr: np.ndarray) -> np.ndarray:
        return np.array([_gamma_comp(model, lam, ph, float(u)) for u in u_arr])

    def density(r: float) -> float:
        r = float(r)
        if r <= 0.0:
            raise DomainError("occupation density is defined for r > 0")
        g_r = _gamma_comp(model, lam, ph, r)

        # int_0^r (e^{-lam s} G(r) - G(r-s)) Lambda'(x, s) ds with the
        # sin^2 substitution absorbing the 1/sqrt endpoints of both factors
        def conv_f(w_arr):
            sn = np.sin(w_arr)
            cs = np.cos(w_arr)
            s = r * sn * sn
            lp = lam_prime_vec(s)
            gc = gamma_comp_vec(r * cs * cs)
            return (np.exp(-lam * s) * g_r - gc) * lp * (2.0 * r * sn * cs)

        conv = gl_adaptive(conv_f, 0.0, 0.5 * math.pi, tol_abs=_CONV_TOL,
                           tol_rel=_CONV_TOL, n0=48, nmax=384)

        # tail integral T~(r) = int_0^inf e^{-lam v} Lambda'(x, r+v) dv via v = -ln(1-t)/lam
        def tail_f(t_arr):
            v = -np.log1p(-t_arr) / lam
            return lam_prime_vec(r + v) / lam

        tail = gl_fixed(tail_f, 0.0, 1.0, 96)

        val = mean * ph * (conv + (psip + g_r * math.exp(-lam * r)) * tail)
        if val < 0.0:
            if val < -_NEG_DENSITY_CLAMP:
                raise RuntimeError(
                    f"occupation density significantly negative at r={r:g}: {val!r}"
                )
            warnings.warn(f"occupation density clamped to 0 at r={r:g} ({val:.3e})")
            return 0.0
        return val

    return OccupationLaw(
        atom_at_zero=atom,
        density=density,
        model=model,
        x=x,
        lam=lam,
        decay_rate=_transform_decay_rate(model),
    )
