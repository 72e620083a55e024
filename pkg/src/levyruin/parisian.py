"""Parisian ruin with exponential-sum, Erlang(2) and Erlang(n) implementation delays.

Every identity is closed-form in the scale functions.  Removable singularities
(p = lam confluences, theta at the drift root Phi_q, theta at Phi_{q+lam}) are
evaluated through dedicated confluent branches or analytic limits, never by naive
evaluation next to the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from .errors import DomainError
from .models import LevyModel, _psi_any, _psi_prime_any, _psi_second_any, phi
from .occupation import joint_lt_upcross, lt_occupation_inf
from .scale import (
    scale_context,
    script_w,
    w,
    w_tilde,
    z,
    z_tilde,
    _z_d2theta,
)
from .util import clamp_unit

_POLE_TOL = 1e-12
_DENSITY_CLAMP = 1e-9


def _psi_q(model: LevyModel, q: float, theta: float) -> float:
    return _psi_any(model, theta) - q


def _floor_density(val: float, floor: float, what: str) -> float:
    if abs(val) <= floor:
        return 0.0
    if val < 0.0:
        if val < -max(_DENSITY_CLAMP, floor):
            raise RuntimeError(f"{what} significantly negative: {val!r}")
        return 0.0
    return val


def _check_pole(theta: float, pole: float, label: str) -> None:
    if abs(theta - pole) <= _POLE_TOL * (1.0 + abs(pole)):
        raise DomainError(
            f"theta = {theta:g} hits the removable point {label} = {pole:g}; "
            "use the dedicated confluent entry point"
        )


def _e_script(model: LevyModel, ctx, lam: float, x: float, theta: float) -> float:
    # E^{(q,lam)}(x, theta) = lam Z_q(x,theta) - psi_q(theta) Z_q(x, Phi_{lam+q})
    phi_lq = phi(model, ctx.q + lam)
    return lam * z(ctx, x, theta) - _psi_q(model, ctx.q, theta) * z(ctx, x, phi_lq)


def ruin_prob_sum_exp(model: LevyModel, x: float, p: float, lam: float) -> float:
    """Probability of Parisian ruin with per-excursion delay Exp(p) + Exp(lam).

    Complement of the infinite-horizon occupation transform; symmetric in (p, lam).
    """
    return clamp_unit(1.0 - lt_occupation_inf(model, x, p, lam), "ruin_prob_sum_exp")


def gs_lt_two_sided(model: LevyModel, x: float, b: float, q: float, p: float,
                    lam: float, theta: float) -> float:
    """E_x[ e^{-q rho + theta X_rho} ; rho < tau_b^+ ] for the Exp(p)+Exp(lam) delay."""
    if x > b:
        raise DomainError("gs_lt_two_sided requires x <= b")
    if p <= 0.0 or lam <= 0.0 or q < 0.0 or theta < 0.0:
        raise DomainError("gs_lt_two_sided requires p > 0, lam > 0, q >= 0, theta >= 0")
    ctx = scale_context(model, q)
    phi_lq = phi(model, q + lam)
    phi_pq = phi(model, q + p)
    _check_pole(theta, phi_lq, "Phi_{q+lam}")
    _check_pole(theta, phi_pq, "Phi_{q+p}")
    ratio = z_tilde(ctx, x, phi_lq, phi_pq) / z_tilde(ctx, b, phi_lq, phi_pq)
    pref = p / (_psi_q(model, q + lam, theta) * _psi_q(model, q + p, theta))
    return pref * (
        _e_script(model, ctx, lam, x, theta) - ratio * _e_script(model, ctx, lam, b, theta)
    )


def _limit_coeff(model: LevyModel, q: float, theta: float, phi_q: float) -> float:
    # psi_q(theta)/(theta - Phi_q), with the removable point evaluated analytically
    if abs(theta - phi_q) <= 1e-9 * (1.0 + phi_q):
        return _psi_prime_any(model, phi_q)
    return _psi_q(model, q, theta) / (theta - phi_q)


def gs_lt_infinite(model: LevyModel, x: float, q: float, p: float, lam: float,
                   theta: float) -> float:
    """E_x[ e^{-q rho + theta X_rho} ; rho < inf ] for the Exp(p)+Exp(lam) delay.

    The factor psi_q(theta)/(theta - Phi_q) in the limiting constant is removable at
    theta = Phi_q and is evaluated as its analytic limit there (this covers the
    q = 0, theta = 0 case under positive drift).
    """
    if p <= 0.0 or lam <= 0.0 or q < 0.0 or theta < 0.0:
        raise DomainError("gs_lt_infinite requires p > 0, lam > 0, q >= 0, theta >= 0")
    if q == 0.0:
        model.require_positive_drift("gs_lt_infinite with q = 0")
    ctx = scale_context(model, q)
    phi_q = ctx.phi_q
    phi_lq = phi(model, q + lam)
    phi_pq = phi(model, q + p)
    _check_pole(theta, phi_lq, "Phi_{q+lam}")
    _check_pole(theta, phi_pq, "Phi_{q+p}")
    coeff = _limit_coeff(model, q, theta, phi_q) * (phi_lq - theta) * (phi_pq - phi_q) / p
    pref = p / (_psi_q(model, q + lam, theta) * _psi_q(model, q + p, theta))
    return pref * (
        _e_script(model, ctx, lam, x, theta) - coeff * z_tilde(ctx, x, phi_lq, phi_pq)
    )


def up_cross_three_barrier(model: LevyModel, x: float, b: float, a: float, q: float,
                           p: float, lam: float) -> float:
    """E_x[ e^{-q tau_b^+} ; tau_b^+ < rho ^ tau_{-a}^- ] as a ratio of composite
    scale functions.

    The composite vanishes identically at p = lam, so the ratio is taken through
    a symmetric-offset limit there (the ratio itself is regular).
    """
    if not (-a <= x <= b):
        raise DomainError("up_cross_three_barrier requires -a <= x <= b")

    def ratio(p_: float) -> float:
        return w_tilde(model, q, p_, lam, x, a) / w_tilde(model, q, p_, lam, b, a)

    if abs(p - lam) > 1e-8 * (1.0 + lam):
        return clamp_unit(ratio(p), "up_cross_three_barrier")
    d = 1e-5 * (1.0 + lam)
    v1 = 0.5 * (ratio(lam + d) + ratio(lam - d))
    v2 = 0.5 * (ratio(lam + 0.5 * d) + ratio(lam - 0.5 * d))
    if abs(v1 - v2) > 1e-6 * (1.0 + abs(v2)):
        raise RuntimeError("up_cross_three_barrier failed the Richardson check at p = lam")
    return clamp_unit(v2, "up_cross_three_barrier")


def up_cross_before_ruin(model: LevyModel, x: float, b: float, q: float, p: float,
                         lam: float) -> float:
    """E_x[ e^{-q tau_b^+} ; tau_b^+ < rho ].

    Shares its implementation with :func:`levyruin.occupation.joint_lt_upcross`
    (the two quantities coincide).
    """
    return joint_lt_upcross(model, x, b, q, p, lam)


def gerber_shiu_density(model: LevyModel, x: float, b: float, q: float, p: float,
                        lam: float, y: float) -> float:
    """Density in y <= 0 of e^{-q rho} 1{X_rho in dy, rho < tau_b^+}, p != lam."""
    if y > 0.0:
        raise DomainError("gerber_shiu_density requires y <= 0")
    if x > b:
        raise DomainError("gerber_shiu_density requires x <= b")
    if p <= 0.0 or lam <= 0.0 or q < 0.0:
        raise DomainError("gerber_shiu_density requires p > 0, lam > 0, q >= 0")
    if abs(p - lam) <= 1e-10 * (1.0 + lam):
        raise DomainError(
            "gerber_shiu_density is singular at p = lam; use gs_density_e2 (Erlang(2))"
        )
    ctx = scale_context(model, q)
    phi_lq = phi(model, q + lam)
    phi_pq = phi(model, q + p)
    ctx_l = scale_context(model, q + lam)
    ctx_p = scale_context(model, q + p)

    def e_y(xi: float):
        wl = script_w(ctx, lam, xi, xi - y)
        wp = script_w(ctx, p, xi, xi - y)
        bracket = (lam * w(ctx_l, -y) - p * w(ctx_p, -y)) / (lam - p)
        zv = z(ctx, xi, phi_lq)
        val = (wl - wp) * lam / (lam - p) - zv * bracket
        mag = (abs(wl) + abs(wp)) * lam / abs(lam - p) + abs(zv) * (
            lam * w(ctx_l, -y) + p * w(ctx_p, -y)
        ) / abs(lam - p)
        return val, mag

    ratio = z_tilde(ctx, x, phi_lq, phi_pq) / z_tilde(ctx, b, phi_lq, phi_pq)
    ex, mx = e_y(x)
    eb, mb = e_y(b)
    val = p * (ex - ratio * eb)
    # the exponentially growing pieces cancel against a decaying true value; below
    # the quadrature/cancellation floor the sign and size are meaningless
    floor = 1e-11 * p * (mx + abs(ratio) * mb) + 1e-10
    return _floor_density(val, floor, "Gerber-Shiu density")


def lt_occupation_exp_horizon(model: LevyModel, x: float, p: float, q: float,
                              lam: float) -> float:
    """E_x[ e^{-p O_{e_q, lam}} ]: occupation up to an independent Exp(q) horizon.

    Valid for any drift (the exponential horizon keeps everything finite).
    """
    if q <= 0.0:
        raise DomainError("lt_occupation_exp_horizon requires q > 0")
    if lam <= 0.0 or p < 0.0:
        raise DomainError("lt_occupation_exp_horizon requires lam > 0 and p >= 0")
    if p == 0.0:
        return 1.0
    ctx = scale_context(model, q)
    phi_q = ctx.phi_q
    phi_lq = phi(model, q + lam)
    phi_pq = phi(model, q + p)
    e0 = lam * z(ctx, x, 0.0) + q * z(ctx, x, phi_lq)
    combined = p * e0 - q * phi_lq * (phi_pq - phi_q) / phi_q * z_tilde(ctx, x, phi_lq, phi_pq)
    val = 1.0 - combined / ((lam + q) * (p + q))
    return clamp_unit(val, "lt_occupation_exp_horizon")


def ruin_prob_erlang2(model: LevyModel, x: float, lam: float) -> float:
    """Probability of Parisian ruin with an Erlang(2, lam) delay per excursion.

    Confluent (p -> lam) limit of :func:`ruin_prob_sum_exp`.
    """
    model.require_positive_drift("ruin_prob_erlang2")
    if lam <= 0.0:
        raise DomainError("ruin_prob_erlang2 requires lam > 0")
    ctx0 = scale_context(model, 0.0)
    ph = phi(model, lam)
    val = 1.0 - model.mean() * (ph * ph / (lam * lam)) * z_tilde(ctx0, x, ph, ph)
    return clamp_unit(val, "ruin_prob_erlang2")


def erlang2_ruin_alternative_form(model: LevyModel, x: float, lam: float) -> float:
    """Alternative printed closed forms for the Erlang(2) ruin probability.

    These per-model expressions circulate as the final worked-example formulas for
    the two models.  They are retained verbatim for the validation report: the
    Monte Carlo oracle and :func:`ruin_prob_erlang2` disagree with them (see the
    acceptance suite), so they must not be used for computation.
    """
    ph = phi(model, lam)
    if model.kind == "brownian":
        mu, s2 = model.mu, model.sigma ** 2
        pref = (math.sqrt(mu * mu + 2.0 * s2 * lam) - mu) ** 2 / (lam * lam * s2 * s2)
        return 1.0 - pref * (1.0 / ph - math.exp(-2.0 * mu / s2 * x) / (ph + 2.0 * mu / s2))
    c, eta, alpha = model.c, model.eta, model.alpha
    return 1.0 - (1.0 / lam) * (
        1.0 / ph ** 2
        - (eta / (c * alpha)) * math.exp((eta / c - alpha) * x) / (ph + alpha - eta / c) ** 2
    )


# ---------------------------------------------------------------------------
# Erlang(2) fluctuation identities
# ---------------------------------------------------------------------------


def up_cross_e2(model: LevyModel, x: float, b: float, q: float, lam: float) -> float:
    """E_x[ e^{-q tau_b^+} ; tau_b^+ < rho^{(2)} ] (Erlang(2, lam) delay)."""
    if x > b:
        raise DomainError("up_cross_e2 requires x <= b")
    if lam <= 0.0 or q < 0.0:
        raise DomainError("up_cross_e2 requires lam > 0 and q >= 0")
    ctx = scale_context(model, q)
    ph = phi(model, q + lam)
    val = z_tilde(ctx, x, ph, ph) / z_tilde(ctx, b, ph, ph)
    return clamp_unit(val, "up_cross_e2")


def gs_lt_two_sided_e2(model: LevyModel, x: float, b: float, q: float, lam: float,
                       theta: float) -> float:
    """E_x[ e^{-q rho^{(2)} + theta X} ; rho^{(2)} < tau_b^+ ]."""
    if x > b:
        raise DomainError("gs_lt_two_sided_e2 requires x <= b")
    if lam <= 0.0 or q < 0.0 or theta < 0.0:
        raise DomainError("gs_lt_two_sided_e2 requires lam > 0, q >= 0, theta >= 0")
    ctx = scale_context(model, q)
    ph = phi(model, q + lam)
    _check_pole(theta, ph, "Phi_{q+lam}")
    ratio = z_tilde(ctx, x, ph, ph) / z_tilde(ctx, b, ph, ph)
    pref = lam / _psi_q(model, q + lam, theta) ** 2
    return pref * (
        _e_script(model, ctx, lam, x, theta) - ratio * _e_script(model, ctx, lam, b, theta)
    )


def gs_lt_infinite_e2(model: LevyModel, x: float, q: float, lam: float,
                      theta: float) -> float:
    """E_x[ e^{-q rho^{(2)} + theta X} ; rho^{(2)} < inf ]."""
    if lam <= 0.0 or q < 0.0 or theta < 0.0:
        raise DomainError("gs_lt_infinite_e2 requires lam > 0, q >= 0, theta >= 0")
    if q == 0.0:
        model.require_positive_drift("gs_lt_infinite_e2 with q = 0")
    ctx = scale_context(model, q)
    phi_q = ctx.phi_q
    ph = phi(model, q + lam)
    _check_pole(theta, ph, "Phi_{q+lam}")
    coeff = _limit_coeff(model, q, theta, phi_q) * (ph - theta) * (ph - phi_q) / lam
    pref = lam / _psi_q(model, q + lam, theta) ** 2
    return pref * (_e_script(model, ctx, lam, x, theta) - coeff * z_tilde(ctx, x, ph, ph))


def gs_lt_infinite_e2_confluent(model: LevyModel, x: float, q: float, lam: float) -> float:
    """theta -> Phi_{q+lam} limit of :func:`gs_lt_infinite_e2` (a double pole with a
    double zero; second-order expansion).

    Supplies E_x[ e^{-q rho^{(2)} + Phi_{q+lam} X} ; rho^{(2)} < inf ] for the
    Erlang recursion.
    """
    if lam <= 0.0 or q < 0.0:
        raise DomainError("gs_lt_infinite_e2_confluent requires lam > 0 and q >= 0")
    if q == 0.0:
        model.require_positive_drift("gs_lt_infinite_e2_confluent with q = 0")
    ctx = scale_context(model, q)
    phi_q = ctx.phi_q
    ph = phi(model, q + lam)
    psip = _psi_prime_any(model, ph)
    psis = _psi_second_any(model, ph)
    zt = z_tilde(ctx, x, ph, ph)
    bracket2 = (
        lam * _z_d2theta(ctx, x, ph)
        - psis * z(ctx, x, ph)
        - (2.0 / (ph - phi_q) - 2.0 * psip / lam) * zt
    )
    return lam * bracket2 / (2.0 * psip * psip)


def _lam_derivative(f, lam: float, label: str, scale: float = 0.0) -> float:
    # central difference in lam with an h/2 Richardson agreement check; `scale`
    # widens the tolerance by the cancellation noise of the differenced values
    h = min(1e-5 * (1.0 + lam), 0.25 * lam)
    d1 = (f(lam + h) - f(lam - h)) / (2.0 * h)
    d2 = (f(lam + 0.5 * h) - f(lam - 0.5 * h)) / h
    if abs(d1 - d2) > 1e-6 * (1.0 + abs(d2)) + 1e-9 * scale / h:
        raise RuntimeError(f"lam-derivative of {label} failed the Richardson check")
    return (4.0 * d2 - d1) / 3.0


def gs_density_e2(model: LevyModel, x: float, b: float, q: float, lam: float,
                  y: float) -> float:
    """Gerber-Shiu density at Erlang(2, lam) Parisian ruin (p -> lam limit of
    :func:`gerber_shiu_density`).

    The lam-derivatives of the convolution scale function and of W_{q+lam} are
    computed by validated central differences.
    """
    if y > 0.0:
        raise DomainError("gs_density_e2 requires y <= 0")
    if x > b:
        raise DomainError("gs_density_e2 requires x <= b")
    if lam <= 0.0 or q < 0.0:
        raise DomainError("gs_density_e2 requires lam > 0 and q >= 0")
    ctx = scale_context(model, q)
    ph = phi(model, q + lam)
    ctx_l = scale_context(model, q + lam)

    def e_y(xi: float):
        sw = script_w(ctx, lam, xi, xi - y)
        wv = w(ctx_l, -y)
        d_conv = _lam_derivative(
            lambda s: script_w(ctx, s, xi, xi - y), lam, "scriptW", scale=abs(sw)
        )
        d_w = _lam_derivative(
            lambda s: w(scale_context(model, q + s), -y), lam, "W_{q+lam}", scale=wv
        )
        zv = z(ctx, xi, ph)
        val = lam * d_conv - zv * (wv + lam * d_w)
        mag = lam * abs(d_conv) + abs(zv) * (wv + lam * abs(d_w)) + abs(sw)
        return val, mag

    ratio = z_tilde(ctx, x, ph, ph) / z_tilde(ctx, b, ph, ph)
    ex, mx = e_y(x)
    eb, mb = e_y(b)
    val = lam * (ex - ratio * eb)
    floor = 1e-10 * lam * (mx + abs(ratio) * mb) + 1e-10
    return _floor_density(val, floor, "Erlang(2) Gerber-Shiu density")


_ERLANG2_IDENTITIES = {
    "gs_density_e2": gs_density_e2,
    "gs_lt_two_sided_e2": gs_lt_two_sided_e2,
    "gs_lt_infinite_e2": gs_lt_infinite_e2,
    "up_cross_e2": up_cross_e2,
}


def erlang2_identity(name: str, model: LevyModel, **params) -> float:
    """Dispatch one of the Erlang(2) identities by its stable name."""
    try:
        fn = _ERLANG2_IDENTITIES[name]
    except KeyError:
        raise DomainError(
            f"unknown Erlang(2) identity {name!r}; known: {sorted(_ERLANG2_IDENTITIES)}"
        ) from None
    return fn(model, **params)


# ---------------------------------------------------------------------------
# Erlang(n) recursion and the fixed-delay approximation
# ---------------------------------------------------------------------------


def deficit_transform_t0(model: LevyModel, x: float, lam: float) -> float:
    """E_x[ e^{Phi_lam X_{T_0^-}} ; T_0^- < inf ].

    b -> inf, theta -> Phi_lam limit of the joint transform at the first Poisson
    observation below 0; feeds the n = 2 step of the Erlang recursion.
    """
    model.require_positive_drift("deficit_transform_t0")
    ctx0 = scale_context(model, 0.0)
    ph = phi(model, lam)
    psip = _psi_prime_any(model, ph)
    return (z_tilde(ctx0, x, ph, ph) - lam * z(ctx0, x, ph) / ph) / psip


def deficit_transform_erlang2(model: LevyModel, x: float, lam: float) -> float:
    """E_x[ e^{Phi_lam X_{rho^{(2)}}} ; rho^{(2)} < inf ]; feeds the n = 3 step."""
    return gs_lt_infinite_e2_confluent(model, x, 0.0, lam)


@dataclass(frozen=True)
class ErlangNResult:
    """Erlang(n, lam) Parisian ruin probability with recursion metadata.

    ``method`` is "analytic" for n <= 3 and "hybrid_mc" when Monte Carlo estimates
    of the deficit transforms entered the recursion (n >= 4); the estimates used
    are then listed in ``mc_transforms`` as (k, start, estimate) triples.
    """

    value: float
    n: int
    lam: float
    x: float
    method: str
    mc_transforms: tuple = ()

    def __float__(self) -> float:
        return self.value


def ruin_prob_erlang_n(model: LevyModel, x: float, lam: float, n: int,
                       mc_config=None, workers: int = 1) -> ErlangNResult:
    """Probability of Parisian ruin with an Erlang(n, lam) delay per excursion.

    Survival recursion over n.  The deficit transforms E[ e^{Phi_lam X_rho} ] are
    closed-form for the first two stages; from n >= 4 they are estimated by the
    Monte Carlo oracle (pass ``mc_config``), and the result is labeled hybrid.
    """
    model.require_positive_drift("ruin_prob_erlang_n")
    if lam <= 0.0:
        raise DomainError("ruin_prob_erlang_n requires lam > 0")
    if not isinstance(n, int) or n < 1:
        raise DomainError("ruin_prob_erlang_n requires integer n >= 1")
    if n >= 4 and mc_config is None:
        raise DomainError(
            "ruin_prob_erlang_n with n >= 4 needs mc_config for the hybrid "
            "Monte Carlo deficit-transform estimates"
        )
    ctx0 = scale_context(model, 0.0)
    ph = phi(model, lam)
    mean = model.mean()
    surv_x = clamp_unit(mean * (ph / lam) * z(ctx0, x, ph), "Erlang survival")
    surv_0 = clamp_unit(mean * (ph / lam) * z(ctx0, 0.0, ph), "Erlang survival")
    mc_transforms = []

    def transform(k: int, start: float) -> float:
        if k == 1:
            return deficit_transform_t0(model, start, lam)
        if k == 2:
            return deficit_transform_erlang2(model, start, lam)
        from .mc import PathFunctional, estimate  # local: keeps the analytic layer light

        fn = PathFunctional(
            name="rho_erlang",
            params={"n": float(k), "lam": lam, "construction": "observation"},
            x0=start,
            tilt_theta=ph,
        )
        est = estimate(model, mc_config, fn, workers=workers)
        mc_transforms.append((k, start, est))
        return est.value

    for k in range(2, n + 1):
        t_x = transform(k - 1, x)
        t_0 = transform(k - 1, 0.0)
        surv_x = surv_x + surv_0 * t_x / (1.0 - t_0)
        surv_0 = surv_0 / (1.0 - t_0)
    value = clamp_unit(1.0 - surv_x, "ruin_prob_erlang_n")
    return ErlangNResult(
        value=value,
        n=n,
        lam=lam,
        x=x,
        method="analytic" if n <= 3 else "hybrid_mc",
        mc_transforms=tuple(mc_transforms),
    )


@dataclass(frozen=True)
class FixedDelayResult:
    """Erlang(n, n/r) approximation of fixed-delay Parisian ruin, with the
    convergence sequence over n in {1, 2, 4, 8, ...} up to the requested n."""

    value: float
    r: float
    n: int
    x: float
    sequence: tuple  # ((n_k, value_k), ...)

    def __float__(self) -> float:
        return self.value


def fixed_delay_approx(model: LevyModel, x: float, r: float, n: int,
                       mc_config=None, workers: int = 1) -> FixedDelayResult:
    """Approximate fixed-delay (kappa_r) Parisian ruin by Erlang(n, n/r) delays."""
    if r <= 0.0:
        raise DomainError("fixed_delay_approx requires r > 0")
    if not isinstance(n, int) or n < 1:
        raise DomainError("fixed_delay_approx requires integer n >= 1")
    ns = sorted({2 ** k for k in range(0, 40) if 2 ** k <= n} | {n})
    seq = []
    for nk in ns:
        res = ruin_prob_erlang_n(model, x, nk / r, nk, mc_config=mc_config, workers=workers)
        seq.append((nk, res.value))
    return FixedDelayResult(value=seq[-1][1], r=r, n=n, x=x, sequence=tuple(seq))


# ---------------------------------------------------------------------------
# Fluctuation identities at the first Poisson observation below 0
# ---------------------------------------------------------------------------


def t0_joint_lt(model: LevyModel, x: float, b: float, q: float, lam: float,
                theta: float) -> float:
    """E_x[ e^{-q T_0^- + theta X_{T_0^-}} ; T_0^- < tau_b^+ ]."""
    if x > b:
        raise DomainError("t0_joint_lt requires x <= b")
    if lam <= 0.0 or q < 0.0 or theta < 0.0:
        raise DomainError("t0_joint_lt requires lam > 0, q >= 0, theta >= 0")
    ctx = scale_context(model, q)
    denom = lam - _psi_q(model, q, theta)
    if abs(denom) <= _POLE_TOL * (1.0 + lam):
        raise DomainError(
            "theta satisfies psi_q(theta) = lam (theta = Phi_{q+lam}), a removable point"
        )
    ph = phi(model, q + lam)
    return (lam / denom) * (
        z(ctx, x, theta) - z(ctx, x, ph) * z(ctx, b, theta) / z(ctx, b, ph)
    )


def upcross_before_t0_two_sided(model: LevyModel, x: float, b: float, a: float,
                                q: float, lam: float) -> float:
    """E_x[ e^{-q tau_b^+} ; tau_b^+ < T_0^- ^ tau_{-a}^- ]."""
    if not (-a <= x <= b):
        raise DomainError("upcross_before_t0_two_sided requires -a <= x <= b")
    if a < 0.0 or lam <= 0.0 or q < 0.0:
        raise DomainError("upcross_before_t0_two_sided requires a >= 0, lam > 0, q >= 0")
    ctx = scale_context(model, q)
    val = script_w(ctx, lam, x, x + a) / script_w(ctx, lam, b, b + a)
    return clamp_unit(val, "upcross_before_t0_two_sided")


def upcross_before_t0(model: LevyModel, x: float, b: float, q: float, lam: float) -> float:
    """E_x[ e^{-q tau_b^+} ; tau_b^+ < T_0^- ]."""
    if x > b:
        raise DomainError("upcross_before_t0 requires x <= b")
    if lam <= 0.0 or q < 0.0:
        raise DomainError("upcross_before_t0 requires lam > 0 and q >= 0")
    ctx = scale_context(model, q)
    ph = phi(model, q + lam)
    return clamp_unit(z(ctx, x, ph) / z(ctx, b, ph), "upcross_before_t0")


def delayed_w_functional(model: LevyModel, x: float, b: float, a: float, q: float,
                         lam: float, p: float, z_shift: float) -> float:
    """E_x[ e^{-q T_0^-} W_p(X_{T_0^-} + z) ; T_0^- < tau_b^+ ^ tau_{-a}^- ].

    The point p = q + lam is removable; it is evaluated by a symmetric relative
    offset with a Richardson agreement check (a raw offset of 1e-8 would sit on
    the convolution quadrature's 1e-11 absolute floor, so the offset is 1e-5).
    """
    if not (-a <= x <= b):
        raise DomainError("delayed_w_functional requires -a <= x <= b")
    if z_shift <= 0.0:
        raise DomainError("delayed_w_functional requires z > 0")
    if a < 0.0 or lam <= 0.0 or q < 0.0 or p < 0.0:
        raise DomainError("delayed_w_functional requires a, q >= 0, p >= 0, lam > 0")
    ctx = scale_context(model, q)
    ratio = script_w(ctx, lam, x, x + a) / script_w(ctx, lam, b, b + a)

    def core(p_: float) -> float:
        pref = lam / (p_ - (q + lam))
        top = script_w(ctx, p_ - q, b, b + z_shift) - script_w(ctx, lam, b, b + z_shift)
        bot = script_w(ctx, p_ - q, x, x + z_shift) - script_w(ctx, lam, x, x + z_shift)
        return pref * (ratio * top - bot)

    pole = q + lam
    if abs(p - pole) > 1e-8 * (1.0 + pole):
        return core(p)
    d = 1e-5 * (1.0 + pole)
    v1 = 0.5 * (core(pole + d) + core(pole - d))
    v2 = 0.5 * (core(pole + 0.5 * d) + core(pole - 0.5 * d))
    if abs(v1 - v2) > 1e-6 * (1.0 + abs(v2)):
        raise RuntimeError("delayed_w_functional failed the Richardson check at p = q + lam")
    return v2
