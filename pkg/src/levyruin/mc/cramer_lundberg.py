"""Exact event-driven simulation of the Cramer-Lundberg model with Exp claims.

Between claims the surplus drifts upward deterministically, so every level
crossing time, observation position and Parisian deadline position is computed
exactly; the only randomness is claim arrivals/sizes, observation epochs and
the delay clocks.  There is no discretization bias; the only bias source is the
escape-level horizon, whose residual is bounded in closed form by the driver.
"""

from __future__ import annotations

import math

from ..errors import UnsupportedFunctional
from ..models import LevyModel
from ..scale import scale_context, w
from .config import EscapeLevel, McConfig
from .functionals import EV_LOWER, EV_NONE, EV_RUIN, EV_UPCROSS, PathFunctional, excursion_occupation


def _horizon_setup(model: LevyModel, config: McConfig, needs_escape: bool):
    if isinstance(config.horizon, EscapeLevel):
        if needs_escape:
            model.require_positive_drift("escape-level Monte Carlo horizon")
        return config.horizon.b_esc, None
    return math.inf, config.horizon.t_max


def make_occupation_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    c, eta, alpha = model.c, model.eta, model.alpha
    prm = fn.params
    lam = float(prm["lam"])
    mode = "literal" if fn.name == "occupation_poisson_literal" else "union"
    n_consec = int(prm.get("n", 1))
    b = prm.get("b")
    b = None if b is None else float(b)
    exp_rate = prm.get("exp_horizon_rate")
    q = fn.discount_q
    p = fn.laplace_p
    x0 = fn.x0
    besc, tmax = _horizon_setup(model, config, needs_escape=exp_rate is None)
    if b is not None and besc <= b:
        besc = b + 1.0
    if mode == "literal" and (tmax is not None or exp_rate is not None):
        raise UnsupportedFunctional("literal occupation has no finite-horizon reading")

    def sim(stream):
        exp_ = stream.exponential
        t = 0.0
        X = x0
        occ = 0.0
        horizon = tmax
        if exp_rate is not None:
            horizon = exp_(float(exp_rate))
        if b is not None and X >= b:
            return math.exp(-p * occ), 0
        while True:
            if X >= 0.0:
                if horizon is None and b is None and X >= besc:
                    return math.exp(-p * occ), 1
                e = exp_(eta)
                if b is not None and X + c * e >= b:
                    tb = t + (b - X) / c
                    if horizon is None or tb <= horizon:
                        return math.exp(-q * tb - p * occ), 0
                    return math.exp(-p * occ), 0
                if horizon is not None and t + e >= horizon:
                    return math.exp(-p * occ), 0
                t += e
                X += c * e - exp_(alpha)
            else:
                obs = []
                next_obs = t + exp_(lam)
                while True:
                    e = exp_(eta)
                    t_rec = t + (0.0 - X) / c
                    t_claim = t + e
                    t_next = t_rec if t_rec <= t_claim else t_claim
                    while next_obs < t_next and (horizon is None or next_obs < horizon):
                        obs.append(next_obs)
                        next_obs += exp_(lam)
                    if horizon is not None and horizon <= t_next:
                        occ += excursion_occupation(obs, horizon, mode, cap=horizon,
                                                    n_consec=n_consec)
                        return math.exp(-p * occ), 0
                    if t_rec <= t_claim:
                        occ += excursion_occupation(obs, t_rec, mode, cap=horizon,
                                                    n_consec=n_consec)
                        t = t_rec
                        X = 0.0
                        break
                    t = t_claim
                    X += c * e - exp_(alpha)

    return sim


def make_clock_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    """Parisian ruin with a fresh delay clock per excursion, run from the
    excursion's start (the claim instant that took the surplus below 0, or time 0
    for a negative start)."""
    c, eta, alpha = model.c, model.eta, model.alpha
    prm = fn.params
    if fn.name == "rho_sum_exp":
        p_rate = float(prm["p"])
        lam = float(prm["lam"])

        def draw_delay(stream):
            return stream.exponential(p_rate) + stream.exponential(lam)

    elif fn.name == "rho_erlang":
        n = int(prm["n"])
        lam = float(prm["lam"])

        def draw_delay(stream):
            tot = 0.0
            for _ in range(n):
                tot += stream.exponential(lam)
            return tot

    elif fn.name == "kappa_fixed":
        r_delay = float(prm["r"])

        def draw_delay(stream):
            return r_delay

    else:  # pragma: no cover
        raise UnsupportedFunctional(fn.name)

    b = prm.get("b")
    b = None if b is None else float(b)
    a = prm.get("a")
    a = None if a is None else float(a)
    q = fn.discount_q
    th = fn.tilt_theta
    success = EV_RUIN if fn.success_event == "ruin" else EV_UPCROSS
    x0 = fn.x0
    besc, tmax = _horizon_setup(model, config, needs_escape=True)
    if tmax is not None:
        raise UnsupportedFunctional("clock-construction ruin needs an escape-level horizon")
    if b is not None and besc <= b:
        besc = b + 1.0

    def value(ev, tm, df):
        if ev != success:
            return 0.0
        return math.exp(-q * tm + th * df)

    def sim(stream):
        exp_ = stream.exponential
        t = 0.0
        X = x0
        if a is not None and X < -a:
            return value(EV_LOWER, 0.0, X), 0
        if b is not None and X >= b:
            return value(EV_UPCROSS, 0.0, 0.0), 0
        while True:
            if X >= 0.0:
                if X >= besc:
                    return value(EV_NONE, 0.0, 0.0), 1
                e = exp_(eta)
                if b is not None and X + c * e >= b:
                    return value(EV_UPCROSS, t + (b - X) / c, 0.0), 0
                t += e
                X += c * e - exp_(alpha)
                if a is not None and X < -a:
                    return value(EV_LOWER, t, X), 0
            else:
                deadline = t + draw_delay(stream)
                while True:
                    e = exp_(eta)
                    t_rec = t + (0.0 - X) / c
                    if t_rec <= t + e:
                        if t_rec > deadline:
                            return value(EV_RUIN, deadline, X + c * (deadline - t)), 0
                        t = t_rec
                        X = 0.0
                        break
                    if t + e > deadline:
                        return value(EV_RUIN, deadline, X + c * (deadline - t)), 0
                    t += e
                    X += c * e - exp_(alpha)
                    if a is not None and X < -a:
                        return value(EV_LOWER, t, X), 0

    return sim


def make_observation_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    """T_0^- and Erlang-by-consecutive-observations ruin (n negative observations
    in a row with no recovery in between)."""
    c, eta, alpha = model.c, model.eta, model.alpha
    prm = fn.params
    lam = float(prm["lam"])
    n = int(prm.get("n", 1))
    b = prm.get("b")
    b = None if b is None else float(b)
    a = prm.get("a")
    a = None if a is None else float(a)
    q = fn.discount_q
    th = fn.tilt_theta
    success = EV_RUIN if fn.success_event == "ruin" else EV_UPCROSS
    x0 = fn.x0
    weight_ctx = None
    shift = 0.0
    if fn.name == "T0_w_weight":
        weight_ctx = scale_context(model, float(prm["pw"]))
        shift = float(prm["shift"])
    besc, tmax = _horizon_setup(model, config, needs_escape=True)
    if tmax is not None:
        raise UnsupportedFunctional("observation-construction ruin needs an escape-level horizon")
    if b is not None and besc <= b:
        besc = b + 1.0

    def value(ev, tm, df):
        if ev != success:
            return 0.0
        out = math.exp(-q * tm + th * df)
        if weight_ctx is not None:
            out *= w(weight_ctx, df + shift)
        return out

    def sim(stream):
        exp_ = stream.exponential
        t = 0.0
        X = x0
        if a is not None and X < -a:
            return value(EV_LOWER, 0.0, X), 0
        if b is not None and X >= b:
            return value(EV_UPCROSS, 0.0, 0.0), 0
        while True:
            if X >= 0.0:
                if X >= besc:
                    return value(EV_NONE, 0.0, 0.0), 1
                e = exp_(eta)
                if b is not None and X + c * e >= b:
                    return value(EV_UPCROSS, t + (b - X) / c, 0.0), 0
                t += e
                X += c * e - exp_(alpha)
                if a is not None and X < -a:
                    return value(EV_LOWER, t, X), 0
            else:
                count = 0
                next_obs = t + exp_(lam)
                while True:
                    e = exp_(eta)
                    t_rec = t + (0.0 - X) / c
                    t_claim = t + e
                    t_next = t_rec if t_rec <= t_claim else t_claim
                    while next_obs < t_next:
                        count += 1
                        if count >= n:
                            return value(EV_RUIN, next_obs, X + c * (next_obs - t)), 0
                        next_obs += exp_(lam)
                    if t_rec <= t_claim:
                        t = t_rec
                        X = 0.0
                        break
                    t = t_claim
                    X += c * e - exp_(alpha)
                    if a is not None and X < -a:
                        return value(EV_LOWER, t, X), 0

    return sim


def make_first_passage_sim(model: LevyModel, fn: PathFunctional, config: McConfig):
    c, eta, alpha = model.c, model.eta, model.alpha
    q = fn.discount_q
    x0 = fn.x0
    besc, tmax = _horizon_setup(model, config, needs_escape=True)
    if tmax is not None:
        raise UnsupportedFunctional("first-passage functionals need an escape-level horizon")

    if fn.name == "tau_b_plus":
        b = float(fn.params["b"])
        besc_eff = max(besc, b + 1.0)

        def sim(stream):
            exp_ = stream.exponential
            t = 0.0
            X = x0
            if X >= b:
                return 1.0, 0
            while True:
                e = exp_(eta)
                if X + c * e >= b:
                    return math.exp(-q * (t + (b - X) / c)), 0
                t += e
                X += c * e - exp_(alpha)
                if X >= besc_eff:  # pragma: no cover - unreachable below b
                    return 0.0, 1

        return sim

    level = float(fn.params["level"])
    th = fn.tilt_theta

    def sim(stream):
        exp_ = stream.exponential
        t = 0.0
        X = x0
        if X < level:
            return math.exp(th * X), 0
        while True:
            if X >= besc:
                return 0.0, 1
            e = exp_(eta)
            t += e
            X += c * e - exp_(alpha)
            if X < level:
                return math.exp(-q * t + th * X), 0

    return sim


_BUILDERS = {
    "occupation_poisson": make_occupation_sim,
    "occupation_poisson_literal": make_occupation_sim,
    "occupation_poisson_n": make_occupation_sim,
    "occupation_at_upcross": make_occupation_sim,
    "rho_sum_exp": make_clock_sim,
    "rho_erlang": make_clock_sim,
    "kappa_fixed": make_clock_sim,
    "T0_minus": make_observation_sim,
    "T0_w_weight": make_observation_sim,
    "tau_b_plus": make_first_passage_sim,
    "tau_level_minus": make_first_passage_sim,
}


def build(model: LevyModel, fn: PathFunctional, config: McConfig):
    prm = fn.params
    if fn.name == "rho_sum_exp" and prm.get("construction", "clock") == "occupation":
        raise UnsupportedFunctional(
            "the occupation construction of rho_sum_exp is Brownian-specific; "
            "the Cramer-Lundberg simulator uses the clock construction"
        )
    if fn.name == "rho_erlang" and prm.get("construction", "clock") == "observation":
        return make_observation_sim(model, fn, config)
    try:
        builder = _BUILDERS[fn.name]
    except KeyError:
        raise UnsupportedFunctional(
            f"functional {fn.name!r} is not implemented for the Cramer-Lundberg simulator"
        ) from None
    return builder(model, fn, config)
