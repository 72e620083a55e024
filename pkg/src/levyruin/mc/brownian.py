"""Hybrid exact-in-law simulation of the Brownian risk model.

Only the path skeleton the functionals can see is simulated: Gaussian increments
at the Poisson observation epochs, exact inverse-Gaussian recovery times from a
negative observation to the next up-crossing of 0, and Brownian-bridge crossing
indicators between skeleton points.  Occupation times, observation deficits,
consecutive-observation Erlang ruin and budget-clock ruin times are all exact in
law; the pure fine-grid fallback is kept only for the fixed-delay time kappa_r,
where the excursion-age clock is not observation-driven.
"""

from __future__ import annotations

import math

from ..errors import UnsupportedFunctional
from ..models import LevyModel
from .config import FixedTime, McConfig
from .functionals import EV_RUIN, EV_UPCROSS, PathFunctional


def _setup(model: LevyModel, fn: PathFunctional, config: McConfig, needs_escape=True):
    if fn.params.get("a") is not None:
        raise UnsupportedFunctional(
            "lower-barrier detection between skeleton points is not exactly samplable "
            "for the Brownian model; use the Cramer-Lundberg simulator"
        )
    if isinstance(config.horizon, FixedTime):
        besc, tmax = math.inf, config.horizon.t_max
    else:
        besc, tmax = config.horizon.b_esc, None
        if needs_escape:
            model.require_positive_drift("escape-level Monte Carlo horizon")
    return besc, tmax


def _crossed_above(stream, x1, x2, gap, level, sig2) -> bool:
    # bridge crossing of `level` from below on one skeleton segment
    if x2 >= level:
        return True
    return stream.uniform() < math.exp(-2.0 * (level - x1) * (level - x2) / (sig2 * gap))


def _touched_zero(stream, x1, x2, gap, sig2) -> bool:
    # both endpoints below 0: did the bridge reach 0?
    return stream.uniform() < math.exp(-2.0 * x1 * x2 / (sig2 * gap))


def make_occupation_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    mu, sig = model.mu, model.sigma
    sig2 = sig * sig
    prm = fn.params
    lam = float(prm["lam"])
    n_consec = int(prm.get("n", 1))
    b = prm.get("b")
    b = None if b is None else float(b)
    exp_rate = prm.get("exp_horizon_rate")
    q = fn.discount_q
    p = fn.laplace_p
    x0 = fn.x0
    if fn.name == "occupation_poisson_literal":
        raise UnsupportedFunctional(
            "the literal overlapping sum needs the in-excursion path after a "
            "sampled recovery; only the Cramer-Lundberg simulator provides it"
        )
    if b is not None and q != 0.0:
        raise UnsupportedFunctional(
            "tau_b crossing times between Brownian skeleton points are not exactly "
            "samplable; occupation_at_upcross needs q = 0 for the Brownian model"
        )
    besc, tmax = _setup(model, fn, config, needs_escape=exp_rate is None)
    if b is not None and besc <= b:
        besc = b + 1.0

    def sim(stream):
        t = 0.0
        X = x0
        occ = 0.0
        consec = 0
        horizon = tmax
        if exp_rate is not None:
            horizon = stream.exponential(float(exp_rate))
        if b is not None and X >= b:
            return math.exp(-p * occ), 0
        while True:
            gap = stream.exponential(lam)
            tn = t + gap
            if horizon is not None and tn >= horizon:
                return math.exp(-p * occ), 0
            Xn = X + mu * gap + sig * math.sqrt(gap) * stream.normal()
            if b is not None and _crossed_above(stream, X, Xn, gap, b, sig2):
                return math.exp(-p * occ), 0
            if Xn < 0.0:
                if n_consec > 1:
                    if X < 0.0 and consec >= 1 and not _touched_zero(stream, X, Xn, gap, sig2):
                        consec += 1
                    else:
                        consec = 1
                    if consec < n_consec:
                        t, X = tn, Xn
                        continue
                depth = -Xn
                rec = stream.inverse_gaussian(depth / mu, depth * depth / sig2)
                if horizon is not None and tn + rec >= horizon:
                    return math.exp(-p * (occ + horizon - tn)), 0
                occ += rec
                t = tn + rec
                X = 0.0
                consec = 0
            else:
                t, X = tn, Xn
                consec = 0
                if horizon is None and b is None and X >= besc:
                    return math.exp(-p * occ), 1

    return sim


def make_rho_occupation_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    """rho_sum_exp through the occupation construction: the Exp(lam) stage is the
    per-excursion observation delay, the Exp(p) stage a fresh budget against the
    post-observation duration.  Ruin times are exact; the mid-excursion deficit is
    not observable here, so exponential tilts are rejected."""
    mu, sig = model.mu, model.sigma
    sig2 = sig * sig
    prm = fn.params
    p_rate = float(prm["p"])
    lam = float(prm["lam"])
    b = prm.get("b")
    b = None if b is None else float(b)
    q = fn.discount_q
    if fn.tilt_theta != 0.0:
        raise UnsupportedFunctional(
            "the deficit at a mid-excursion Parisian ruin time is not exactly "
            "samplable for the Brownian model"
        )
    if b is not None and q != 0.0 and fn.success_event == "upcross":
        raise UnsupportedFunctional(
            "discounted tau_b crossing times are not exactly samplable for the "
            "Brownian model"
        )
    success = EV_RUIN if fn.success_event == "ruin" else EV_UPCROSS
    x0 = fn.x0
    besc, tmax = _setup(model, fn, config)
    if tmax is not None:
        raise UnsupportedFunctional("ruin-event functionals need an escape-level horizon")
    if b is not None and besc <= b:
        besc = b + 1.0

    def sim(stream):
        t = 0.0
        X = x0
        if b is not None and X >= b:
            return (1.0 if success == EV_UPCROSS else 0.0), 0
        while True:
            gap = stream.exponential(lam)
            tn = t + gap
            Xn = X + mu * gap + sig * math.sqrt(gap) * stream.normal()
            if b is not None and _crossed_above(stream, X, Xn, gap, b, sig2):
                return (1.0 if success == EV_UPCROSS else 0.0), 0
            if Xn < 0.0:
                depth = -Xn
                rec = stream.inverse_gaussian(depth / mu, depth * depth / sig2)
                budget = stream.exponential(p_rate)
                if rec > budget:
                    if success == EV_RUIN:
                        return math.exp(-q * (tn + budget)), 0
                    return 0.0, 0
                t = tn + rec
                X = 0.0
            else:
                t, X = tn, Xn
                if X >= besc:
                    return 0.0, 1

    return sim


def make_erlang_obs_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    """Erlang(n, lam) ruin at the n-th consecutive negative observation with the
    path below 0 throughout (bridge-checked); covers T0_minus as n = 1."""
    mu, sig = model.mu, model.sigma
    sig2 = sig * sig
    prm = fn.params
    lam = float(prm["lam"])
    n = int(prm.get("n", 1))
    b = prm.get("b")
    b = None if b is None else float(b)
    q = fn.discount_q
    th = fn.tilt_theta
    if b is not None and q != 0.0 and fn.success_event == "upcross":
        raise UnsupportedFunctional(
            "discounted tau_b crossing times are not exactly samplable for the "
            "Brownian model"
        )
    success = EV_RUIN if fn.success_event == "ruin" else EV_UPCROSS
    x0 = fn.x0
    besc, tmax = _setup(model, fn, config)
    if tmax is not None:
        raise UnsupportedFunctional("ruin-event functionals need an escape-level horizon")
    if b is not None and besc <= b:
        besc = b + 1.0

    def sim(stream):
        t = 0.0
        X = x0
        consec = 0
        if b is not None and X >= b:
            return (1.0 if success == EV_UPCROSS else 0.0), 0
        while True:
            gap = stream.exponential(lam)
            tn = t + gap
            Xn = X + mu * gap + sig * math.sqrt(gap) * stream.normal()
            if b is not None and _crossed_above(stream, X, Xn, gap, b, sig2):
                return (1.0 if success == EV_UPCROSS else 0.0), 0
            if Xn < 0.0:
                if X < 0.0 and consec >= 1 and not _touched_zero(stream, X, Xn, gap, sig2):
                    consec += 1
                else:
                    consec = 1
                if consec >= n:
                    if success == EV_RUIN:
                        return math.exp(-q * tn + th * Xn), 0
                    return 0.0, 0
            else:
                consec = 0
                if Xn >= besc:
                    return 0.0, 1
            t, X = tn, Xn

    return sim


def make_tau_minus_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    """Indicator of ever passing below ``level`` (bridge-checked; q = 0 only)."""
    mu, sig = model.mu, model.sigma
    sig2 = sig * sig
    level = float(fn.params["level"])
    if fn.discount_q != 0.0 or fn.tilt_theta != 0.0:
        raise UnsupportedFunctional(
            "only the bare indicator of tau_level^- is exactly samplable for the "
            "Brownian model"
        )
    x0 = fn.x0
    besc, tmax = _setup(model, fn, config)
    if tmax is not None:
        raise UnsupportedFunctional("first-passage indicators need an escape-level horizon")

    def sim(stream):
        X = x0
        if X < level:
            return 1.0, 0
        while True:
            gap = stream.exponential(1.0)  # skeleton rate; any rate is exact via bridges
            Xn = X + mu * gap + sig * math.sqrt(gap) * stream.normal()
            if Xn < level:
                return 1.0, 0
            if stream.uniform() < math.exp(-2.0 * (X - level) * (Xn - level) / (sig2 * gap)):
                return 1.0, 0
            X = Xn
            if X >= besc:
                return 0.0, 1

    return sim


def make_tau_plus_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    mu, sig = model.mu, model.sigma
    sig2 = sig * sig
    b = float(fn.params["b"])
    if fn.discount_q != 0.0:
        raise UnsupportedFunctional(
            "discounted tau_b crossing times are not exactly samplable for the "
            "Brownian model"
        )
    x0 = fn.x0
    besc, tmax = _setup(model, fn, config)
    if tmax is not None:
        raise UnsupportedFunctional("first-passage indicators need an escape-level horizon")
    besc = max(besc, b + 1.0)

    def sim(stream):
        X = x0
        if X >= b:
            return 1.0, 0
        while True:
            gap = stream.exponential(1.0)
            Xn = X + mu * gap + sig * math.sqrt(gap) * stream.normal()
            if _crossed_above(stream, X, Xn, gap, b, sig2):
                return 1.0, 0
            X = Xn

    return sim


def make_kappa_grid_sim(model: LevyModel, fn: PathFunctional, config: McConfig, dt=None):
    """Fixed-delay Parisian ruin on an Euler grid (the only grid-based Brownian
    functional; the driver reports the grid-halving gap in the bias bound)."""
    mu, sig = model.mu, model.sigma
    r_delay = float(fn.params["r"])
    q = fn.discount_q
    success = EV_RUIN if fn.success_event == "ruin" else EV_UPCROSS
    if success != EV_RUIN:
        raise UnsupportedFunctional("kappa_fixed supports only the ruin event")
    x0 = fn.x0
    besc, tmax = _setup(model, fn, config)
    if tmax is not None:
        raise UnsupportedFunctional("kappa_fixed needs an escape-level horizon")
    step = config.grid_dt if dt is None else dt
    sqdt = math.sqrt(step)

    def sim(stream):
        t = 0.0
        X = x0
        run = 0.0  # age of the current negative spell; delay clocks start at entry
        while True:
            X += mu * step + sig * sqdt * stream.normal()
            t += step
            if X >= 0.0:
                run = 0.0
                if X >= besc:
                    return 0.0, 1
            else:
                run += step
                if run > r_delay:
                    return math.exp(-q * t), 0

    return sim


_BUILDERS = {
    "occupation_poisson": make_occupation_sim,
    "occupation_poisson_literal": make_occupation_sim,
    "occupation_poisson_n": make_occupation_sim,
    "occupation_at_upcross": make_occupation_sim,
    "rho_sum_exp": make_rho_occupation_sim,
    "rho_erlang": make_erlang_obs_sim,
    "T0_minus": make_erlang_obs_sim,
    "tau_level_minus": make_tau_minus_sim,
    "tau_b_plus": make_tau_plus_sim,
    "kappa_fixed": make_kappa_grid_sim,
}


def needs_grid(fn: PathFunctional) -> bool:
    return fn.name == "kappa_fixed"


def build(model: LevyModel, fn: PathFunctional, config: McConfig, dt=None):
    prm = fn.params
    if fn.name == "rho_erlang" and prm.get("construction", "observation") == "clock":
        # Brownian realization of the per-excursion Erlang clock: the first stage
        # is the observation delay, the remaining n-1 stages an explicit budget
        n = int(prm["n"])
        if n == 1:
            inner = PathFunctional(
                name="T0_minus",
                params={"lam": prm["lam"], **({"b": prm["b"]} if "b" in prm else {})},
                x0=fn.x0,
                success_event=fn.success_event,
                discount_q=fn.discount_q,
                tilt_theta=fn.tilt_theta,
            )
            return make_erlang_obs_sim(model, inner, config)
        return _make_erlang_clock_sim(model, fn, config)
    try:
        builder = _BUILDERS[fn.name]
    except KeyError:
        raise UnsupportedFunctional(
            f"functional {fn.name!r} is not implemented for the Brownian simulator"
        ) from None
    if builder is make_kappa_grid_sim:
        return builder(model, fn, config, dt=dt)
    return builder(model, fn, config)


def _make_erlang_clock_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    mu, sig = model.mu, model.sigma
    sig2 = sig * sig
    prm = fn.params
    lam = float(prm["lam"])
    n = int(prm["n"])
    if prm.get("b") is not None or fn.tilt_theta != 0.0:
        raise UnsupportedFunctional(
            "the Brownian Erlang-clock construction supports only the bare ruin "
            "transform (no barriers or deficit tilts)"
        )
    q = fn.discount_q
    success = EV_RUIN if fn.success_event == "ruin" else EV_UPCROSS
    if success != EV_RUIN:
        raise UnsupportedFunctional("the Erlang-clock construction reports ruin only")
    x0 = fn.x0
    besc, tmax = _setup(model, fn, config)
    if tmax is not None:
        raise UnsupportedFunctional("ruin-event functionals need an escape-level horizon")

    def sim(stream):
        t = 0.0
        X = x0
        while True:
            gap = stream.exponential(lam)
            tn = t + gap
            Xn = X + mu * gap + sig * math.sqrt(gap) * stream.normal()
            if Xn < 0.0:
                depth = -Xn
                rec = stream.inverse_gaussian(depth / mu, depth * depth / sig2)
                budget = 0.0
                for _ in range(n - 1):
                    budget += stream.exponential(lam)
                if rec > budget:
                    return math.exp(-q * (tn + budget)), 0
                t = tn + rec
                X = 0.0
            else:
                t, X = tn, Xn
                if X >= besc:
                    return 0.0, 1

    return sim
