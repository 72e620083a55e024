"""Spectrally negative Levy risk models and their analytic primitives.

Two parametric families are supported:

* Brownian risk:      X_t = x + mu*t + sigma*B_t,  psi(th) = mu*th + sigma^2 th^2 / 2
* Cramer-Lundberg with exponential claims:
                      X_t = x + c*t - sum_{i<=N_t} C_i,  C_i ~ Exp(alpha), N ~ Poisson(eta),
                      psi(th) = c*th - eta + alpha*eta/(th + alpha)

The module provides the Laplace exponent ``psi``, its derivative, the right-inverse
``phi`` (the positive root of psi(th)=q) and the transition law of X_r started at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DomainError

BROWNIAN = "brownian"
CRAMER_LUNDBERG = "cramer_lundberg"

# Poisson tail mass at which the Cramer-Lundberg transition series is truncated;
# far below the Monte Carlo noise floor.
_SERIES_TAIL = 1e-12


@dataclass(frozen=True)
class LevyModel:
    """Parametric spectrally negative Levy risk process.

    Exactly one parameter set is meaningful depending on ``kind``:
    (mu, sigma) for "brownian", (c, eta, alpha) for "cramer_lundberg".
    Models with E[X_1] <= 0 are constructible; operations that need the positive
    drift condition raise :class:`DomainError` when called.
    """

    kind: str
    mu: float = 0.0
    sigma: float = 0.0
    c: float = 0.0
    eta: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind == BROWNIAN:
            if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
                raise DomainError("brownian model parameters must be finite")
            if self.sigma <= 0.0:
                # sigma = 0 would give monotone paths, which are excluded.
                raise DomainError("brownian model requires sigma > 0")
        elif self.kind == CRAMER_LUNDBERG:
            for name in ("c", "eta", "alpha"):
                v = getattr(self, name)
                if not math.isfinite(v) or v <= 0.0:
                    raise DomainError(f"cramer_lundberg model requires {name} > 0")
        else:
            raise DomainError(f"unknown model kind {self.kind!r}")

    @classmethod
    def brownian(cls, mu: float, sigma: float) -> "LevyModel":
        return cls(kind=BROWNIAN, mu=float(mu), sigma=float(sigma))

    @classmethod
    def cramer_lundberg(cls, c: float, eta: float, alpha: float) -> "LevyModel":
        return cls(kind=CRAMER_LUNDBERG, c=float(c), eta=float(eta), alpha=float(alpha))

    def mean(self) -> float:
        """E[X_1] = psi'(0+)."""
        if self.kind == BROWNIAN:
            return self.mu
        return self.c - self.eta / self.alpha

    def require_positive_drift(self, what: str) -> None:
        if self.mean() <= 0.0:
            raise DomainError(f"{what} requires E[X_1] > 0, got E[X_1] = {self.mean():g}")

    def describe(self) -> str:
        if self.kind == BROWNIAN:
            return f"brownian(mu={self.mu:g}, sigma={self.sigma:g})"
        return f"cramer_lundberg(c={self.c:g}, eta={self.eta:g}, alpha={self.alpha:g})"


def model_from_dict(spec: dict) -> LevyModel:
    """Build a model from the JSON model-file schema.

    Schema: {"kind": "brownian"|"cramer_lundberg", "mu":..., "sigma":..., "c":..., "eta":..., "alpha":...}
    Unknown keys are rejected.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DomainError("model spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == BROWNIAN:
        allowed = {"kind", "mu", "sigma"}
        required = {"mu", "sigma"}
    elif kind == CRAMER_LUNDBERG:
        allowed = {"kind", "c", "eta", "alpha"}
        required = {"c", "eta", "alpha"}
    else:
        raise DomainError(f"unknown model kind {kind!r}")
    unknown = set(spec) - allowed
    if unknown:
        raise DomainError(f"unknown model fields: {sorted(unknown)}")
    missing = required - set(spec)
    if missing:
        raise DomainError(f"missing model fields: {sorted(missing)}")
    fields = {k: float(v) for k, v in spec.items() if k != "kind"}
    return LevyModel(kind=kind, **fields)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    if theta < 0.0:
        raise DomainError("theta must be >= 0")
    return theta


def _psi_any(model: LevyModel, theta: float) -> float:
    # no domain check; used internally at negative theta (always theta > -alpha for CL)
    if model.kind == BROWNIAN:
        return model.mu * theta + 0.5 * model.sigma ** 2 * theta * theta
    return model.c * theta - model.eta + model.alpha * model.eta / (theta + model.alpha)


def _psi_prime_any(model: LevyModel, theta: float) -> float:
    if model.kind == BROWNIAN:
        return model.mu + model.sigma ** 2 * theta
    return model.c - model.alpha * model.eta / (theta + model.alpha) ** 2


def _psi_second_any(model: LevyModel, theta: float) -> float:
    if model.kind == BROWNIAN:
        return model.sigma ** 2
    return 2.0 * model.alpha * model.eta / (theta + model.alpha) ** 3


def psi(model: LevyModel, theta: float) -> float:
    """Laplace exponent psi(theta) = log E[e^{theta X_1}], theta >= 0."""
    return _psi_any(model, _check_theta(theta))


def psi_prime(model: LevyModel, theta: float) -> float:
    """Exact derivative of the Laplace exponent; psi_prime(model, 0) = E[X_1]."""
    return _psi_prime_any(model, _check_theta(theta))


def phi(model: LevyModel, q: float) -> float:
    """Right-inverse of psi: Phi_q = sup{ th >= 0 : psi(th) = q }.

    Generic bracketed root search (the closed forms of the two models are used
    only as test oracles).  psi(Phi_q) = q to ~1e-13 relative.
    """
    q = float(q)
    if not math.isfinite(q) or q < 0.0:
        raise DomainError("q must be finite and >= 0")
    drift = model.mean()
    if q == 0.0 and drift >= 0.0:
        return 0.0

    def f(th):
        return _psi_any(model, th) - q

    # lower bracket endpoint: f < 0 there
    lo = 0.0 if q > 0.0 else 1e-12
    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e308:  # pragma: no cover - psi is eventually increasing for both models
            raise RuntimeError("failed to bracket Phi_q")
    root = brentq(f, lo, hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200)
    # Newton polish for the 1e-13 relative contract on psi(Phi_q) = q
    for _ in range(2):
        d = _psi_prime_any(model, root)
        if d > 0.0:
            root -= f(root) / d
    return float(root)


@dataclass(frozen=True)
class TransitionDensity:
    """Law of X_r started at 0: an optional atom plus an absolutely continuous part.

    ``density`` is vectorized over numpy arrays.  ``lower``/``upper`` bound the
    effective support of the a.c. part; ``tilted_upper(theta)`` bounds the region
    where e^{theta z} * density(z) is non-negligible.
    """

    atom_location: Optional[float]
    atom_mass: float
    density: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float
    _tilt_scale: float  # extra upper slack per unit of exponential tilt

    def tilted_upper(self, theta: float) -> float:
        if self._tilt_scale == 0.0:
            return self.upper  # hard support (Cramer-Lundberg: z <= c*r)
        return self.upper + theta * self._tilt_scale


def transition(model: LevyModel, r: float) -> TransitionDensity:
    """Transition law P(X_r in dz) started at 0.

    Brownian: Gaussian(mu*r, sigma^2*r), no atom.
    Cramer-Lundberg: atom e^{-eta r} at c*r (no claims) plus the Poisson-Erlang
    mixture sum_{k>=1} P(N_r=k) Erlang(k, alpha)(c*r - z) for z < c*r, truncated
    once the Poisson tail mass drops below 1e-12.
    """
    r = float(r)
    if not math.isfinite(r) or r <= 0.0:
        raise DomainError("r must be finite and > 0")

    if model.kind == BROWNIAN:
        m = model.mu * r
        s = model.sigma * math.sqrt(r)

        def density(z, _m=m, _s=s):
            z = np.asarray(z, dtype=float)
            u = (z - _m) / _s
            return np.exp(-0.5 * u * u) / (_s * math.sqrt(2.0 * math.pi))

        return TransitionDensity(
            atom_location=None,
            atom_mass=0.0,
            density=density,
            lower=m - 14.0 * s,
            upper=m + 14.0 * s,
            _tilt_scale=model.sigma ** 2 * r,
        )

    c, eta, alpha = model.c, model.eta, model.alpha
    cr = c * r
    mu_pois = eta * r
    kmax = int(poisson.isf(_SERIES_TAIL, mu_pois)) + 1
    ks = np.arange(1, kmax + 1, dtype=float)
    log_pmf = -mu_pois + ks * math.log(mu_pois) - gammaln(ks + 1.0)

    def density(z, _ks=ks, _log_pmf=log_pmf, _cr=cr, _alpha=alpha):
        z = np.asarray(z, dtype=float)
        w = _cr - z
        out = np.zeros_like(w)
        pos = w > 0.0
        if np.any(pos):
            wp = w[pos]
            # log of alpha^k w^{k-1} e^{-alpha w} / (k-1)!
            log_erl = (
                _ks[:, None] * math.log(_alpha)
                + (_ks[:, None] - 1.0) * np.log(wp)[None, :]
                - gammaln(_ks[:, None])
                - _alpha * wp[None, :]
            )
            out[pos] = np.exp(_log_pmf[:, None] + log_erl).sum(axis=0)
        return out

    spread = (kmax + 14.0 * math.sqrt(kmax) + 45.0) / alpha
    return TransitionDensity(
        atom_location=cr,
        atom_mass=math.exp(-mu_pois),
        density=density,
        lower=cr - spread,
        upper=cr,
        _tilt_scale=0.0,
    )
