"""Scale functions of the two risk models.

For both models and every killing rate q >= 0, 1/psi_q is a rational function whose
numerator quadratic has one nonnegative root Phi_q and one nonpositive root -zeta_q,
so the q-scale function is a two-exponential

    W_q(x) = A e^{Phi_q x} + B e^{-zeta_q x},   x >= 0,

with A = 1/psi'(Phi_q) and B = 1/psi'(-zeta_q) obtained by partial fractions of
1/psi_q.  Writing rho(theta) = psi_q(theta) / ((theta - Phi_q)(theta + zeta_q))
(= sigma^2/2 for Brownian, c/(theta+alpha) for Cramer-Lundberg), the companion
scale function has the closed form

    Z_q(x, theta) = rho(theta) [A (theta + zeta_q) e^{Phi_q x} + B (theta - Phi_q) e^{-zeta_q x}],

which is the definition e^{theta x}(1 - psi_q(theta) int_0^x e^{-theta y} W_q(y) dy)
with the integral evaluated in closed form.  This representation is regular at
theta = Phi_q (where it reduces to e^{Phi_q x}) and stays bounded for large theta,
which the large-surrogate limit checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .models import (
    BROWNIAN,
    LevyModel,
    _psi_any,
    _psi_prime_any,
    phi,
)

_QUAD_ABS = 1e-11  # absolute target for the second-generation convolution
_QUAD_REL = 1e-12


@dataclass(frozen=True)
class ScaleContext:
    """Cached roots and partial-fraction coefficients of 1/psi_q for one (model, q)."""

    model: LevyModel
    q: float
    phi_q: float
    zeta_q: float
    coeff_a: float
    coeff_b: float


def _zeta(model: LevyModel, q: float) -> float:
    # magnitude of the nonpositive root of psi(theta) = q, from the quadratic numerator
    if model.kind == BROWNIAN:
        s2 = model.sigma ** 2
        return (model.mu + math.sqrt(model.mu ** 2 + 2.0 * s2 * q)) / s2
    c, eta, alpha = model.c, model.eta, model.alpha
    b = c * alpha - eta - q
    return (b + math.sqrt(b * b + 4.0 * c * q * alpha)) / (2.0 * c)


@lru_cache(maxsize=None)
def scale_context(model: LevyModel, q: float) -> ScaleContext:
    """Build (and cache) the scale-function context for killing rate ``q``.

    The partial-fraction derivation is verified against the defining transform
    1/psi_q at construction; a failure indicates a root or residue bug and raises.
    """
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise DomainError("scale context requires q >= 0")
    p = phi(model, q)
    zeta = _zeta(model, q)
    if p + zeta <= 1e-12:
        raise DomainError(
            "degenerate scale function: psi_q has a double root at 0 "
            "(q = 0 with E[X_1] = 0 is not supported)"
        )
    a = 1.0 / _psi_prime_any(model, p)
    b = 1.0 / _psi_prime_any(model, -zeta)
    ctx = ScaleContext(model=model, q=q, phi_q=p, zeta_q=zeta, coeff_a=a, coeff_b=b)
    for s in (p + 0.7, p + 1.9, p + 5.3):
        lhs = a / (s - p) + b / (s + zeta)
        rhs = 1.0 / (_psi_any(model, s) - q)
        if abs(lhs - rhs) > 1e-9 * (abs(rhs) + 1.0):
            raise RuntimeError(
                f"scale coefficient derivation failed for {model.describe()} at q={q:g}"
            )
    return ctx


def _rho(ctx: ScaleContext, theta: float) -> float:
    if ctx.model.kind == BROWNIAN:
        return 0.5 * ctx.model.sigma ** 2
    return ctx.model.c / (theta + ctx.model.alpha)


def _rho_prime(ctx: ScaleContext, theta: float) -> float:
    if ctx.model.kind == BROWNIAN:
        return 0.0
    return -ctx.model.c / (theta + ctx.model.alpha) ** 2


def _rho_second(ctx: ScaleContext, theta: float) -> float:
    if ctx.model.kind == BROWNIAN:
        return 0.0
    return 2.0 * ctx.model.c / (theta + ctx.model.alpha) ** 3


def w(ctx: ScaleContext, x: float) -> float:
    """q-scale function W_q(x); identically 0 for x < 0."""
    if x < 0.0:
        return 0.0
    return ctx.coeff_a * math.exp(ctx.phi_q * x) + ctx.coeff_b * math.exp(-ctx.zeta_q * x)


def _w_vec(ctx: ScaleContext, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = ctx.coeff_a * np.exp(ctx.phi_q * x) + ctx.coeff_b * np.exp(-ctx.zeta_q * x)
    return np.where(x < 0.0, 0.0, out)


def w_prime(ctx: ScaleContext, x: float) -> float:
    """Derivative of W_q on (0, inf); W_q may be non-differentiable at 0."""
    if x <= 0.0:
        raise DomainError("w_prime requires x > 0")
    return (
        ctx.coeff_a * ctx.phi_q * math.exp(ctx.phi_q * x)
        - ctx.coeff_b * ctx.zeta_q * math.exp(-ctx.zeta_q * x)
    )


def _w_prime_vec(ctx: ScaleContext, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return ctx.coeff_a * ctx.phi_q * np.exp(ctx.phi_q * x) - ctx.coeff_b * ctx.zeta_q * np.exp(
        -ctx.zeta_q * x
    )


def z(ctx: ScaleContext, x: float, theta: float) -> float:
    """Companion scale function Z_q(x, theta); equals e^{theta x} for x < 0."""
    theta = float(theta)
    if not math.isfinite(theta) or theta < 0.0:
        raise DomainError("z requires theta >= 0")
    if x < 0.0:
        return math.exp(theta * x)
    e1 = ctx.coeff_a * (theta + ctx.zeta_q) * math.exp(ctx.phi_q * x) + ctx.coeff_b * (
        theta - ctx.phi_q
    ) * math.exp(-ctx.zeta_q * x)
    return _rho(ctx, theta) * e1


def _z_dtheta(ctx: ScaleContext, x: float, theta: float) -> float:
    # derivative of Z_q in its second argument, no positivity contract
    if x < 0.0:
        return x * math.exp(theta * x)
    ea = math.exp(ctx.phi_q * x)
    eb = math.exp(-ctx.zeta_q * x)
    e1 = ctx.coeff_a * (theta + ctx.zeta_q) * ea + ctx.coeff_b * (theta - ctx.phi_q) * eb
    e2 = ctx.coeff_a * ea + ctx.coeff_b * eb
    return _rho_prime(ctx, theta) * e1 + _rho(ctx, theta) * e2


def _z_d2theta(ctx: ScaleContext, x: float, theta: float) -> float:
    if x < 0.0:
        return x * x * math.exp(theta * x)
    ea = math.exp(ctx.phi_q * x)
    eb = math.exp(-ctx.zeta_q * x)
    e1 = ctx.coeff_a * (theta + ctx.zeta_q) * ea + ctx.coeff_b * (theta - ctx.phi_q) * eb
    e2 = ctx.coeff_a * ea + ctx.coeff_b * eb
    return _rho_second(ctx, theta) * e1 + 2.0 * _rho_prime(ctx, theta) * e2


def z_prime_theta(ctx: ScaleContext, x: float, theta: float) -> float:
    """Derivative of Z_q(x, theta) with respect to theta.

    theta = 0 with x >= 0 is rejected (callers take the theta -> 0 limit through
    the divided-difference form instead).
    """
    theta = float(theta)
    if not math.isfinite(theta) or theta < 0.0:
        raise DomainError("z_prime_theta requires theta >= 0")
    if theta == 0.0 and x >= 0.0:
        raise DomainError("z_prime_theta is not exposed at theta = 0 for x >= 0")
    return _z_dtheta(ctx, x, theta)


def z_tilde(ctx: ScaleContext, x: float, alpha: float, beta: float) -> float:
    """Divided-difference combination of Z_q at two exponents (symmetric in them).

    (psi_q(a) Z_q(x,b) - psi_q(b) Z_q(x,a)) / (a - b) away from the confluence;
    psi_q'(a) Z_q(x,a) - psi_q(a) dZ_q/dtheta(x,a) when |a - b| <= 1e-8 (1 + a).
    """
    a, b = float(alpha), float(beta)
    if a < 0.0 or b < 0.0:
        raise DomainError("z_tilde requires alpha, beta >= 0")
    if a > b:
        a, b = b, a
    if b - a <= 1e-8 * (1.0 + a):
        m = 0.5 * (a + b)
        psi_qm = _psi_any(ctx.model, m) - ctx.q
        return _psi_prime_any(ctx.model, m) * z(ctx, x, m) - psi_qm * _z_dtheta(ctx, x, m)
    psi_qa = _psi_any(ctx.model, a) - ctx.q
    psi_qb = _psi_any(ctx.model, b) - ctx.q
    return (psi_qa * z(ctx, x, b) - psi_qb * z(ctx, x, a)) / (a - b)


def script_w(ctx: ScaleContext, p_extra: float, a: float, x: float) -> float:
    """Second-generation scale function: W_q corrected by a convolution from ``a``.

        W_q(x) + p_extra * int_a^x W_{q+p_extra}(x - y) W_q(y) dy

    evaluated by adaptive quadrature.  Reduces to W_q(x) for x <= a or p_extra = 0.
    Since W_q vanishes on the negative axis, a < 0 is equivalent to a = 0.
    """
    p_extra = float(p_extra)
    q2 = ctx.q + p_extra
    if q2 < 0.0:
        raise DomainError("script_w requires q + p_extra >= 0")
    if p_extra == 0.0 or x <= a:
        return w(ctx, x)
    a_eff = max(a, 0.0)
    if x <= a_eff:
        return w(ctx, x)
    ctx2 = scale_context(ctx.model, q2)

    def integrand(y):
        return w(ctx2, x - y) * w(ctx, y)

    val = quad(integrand, a_eff, x, epsabs=_QUAD_ABS, epsrel=_QUAD_REL, limit=300, full_output=1)[0]
    return w(ctx, x) + p_extra * val


def w_tilde(model: LevyModel, q: float, p: float, lam: float, x: float, a: float) -> float:
    """Composite scale function for the three-barrier identity:

        lam * scriptW_x^{(q,p)}(x+a) W_{q+lam}(a)  -  p * scriptW_x^{(q,lam)}(x+a) W_{p+q}(a)

    where the inner convolutions start at the evaluation point x itself.
    """
    if a < 0.0:
        raise DomainError("w_tilde requires a >= 0")
    if p <= 0.0 or lam <= 0.0:
        raise DomainError("w_tilde requires p > 0 and lam > 0")
    ctx_q = scale_context(model, q)
    ctx_ql = scale_context(model, q + lam)
    ctx_qp = scale_context(model, q + p)
    return lam * script_w(ctx_q, p, x, x + a) * w(ctx_ql, a) - p * script_w(
        ctx_q, lam, x, x + a
    ) * w(ctx_qp, a)
