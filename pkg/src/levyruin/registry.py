"""Flat identity registry: stable names, typed parameters, Monte Carlo bindings.

The registry is the single source the CLI dispatches from; each entry knows how
to evaluate its closed form and (where one exists) how to build the matching
Monte Carlo functional for validation campaigns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from . import occupation, parisian
from .errors import UsageError
from .mc import McConfig, PathFunctional, estimate
from .models import LevyModel


@dataclass(frozen=True)
class Param:
    name: str
    kind: str = "float"  # "float" | "int"


@dataclass(frozen=True)
class Identity:
    name: str
    params: tuple
    evaluate: Callable
    mc_functional: Optional[Callable] = None  # (params dict) -> PathFunctional
    informational: bool = False  # validation verdict is informational by design


def _fn(name, keys, success="ruin", q_key=None, theta_key=None, p_key=None, **fixed):
    def build(prm):
        params = {k: prm[v] for k, v in keys.items()}
        params.update(fixed)
        return PathFunctional(
            name=name,
            params=params,
            x0=prm["x"],
            success_event=success,
            discount_q=prm[q_key] if q_key else 0.0,
            tilt_theta=prm[theta_key] if theta_key else 0.0,
            laplace_p=prm[p_key] if p_key else 0.0,
        )

    return build


def _eval_occupation_law(model, prm):
    law = occupation.occupation_law(model, prm["x"], prm["lam"])
    return law.density(prm["r"]), {"atom_at_zero": law.atom_at_zero}


def _eval_erlang_n(model, prm, mc_config=None, workers=1):
    res = parisian.ruin_prob_erlang_n(
        model, prm["x"], prm["lam"], prm["n"], mc_config=mc_config, workers=workers
    )
    return res.value, {"method": res.method, "n": res.n}


def _eval_fixed_delay(model, prm, mc_config=None, workers=1):
    res = parisian.fixed_delay_approx(
        model, prm["x"], prm["r"], prm["n"], mc_config=mc_config, workers=workers
    )
    return res.value, {"erlang_sequence": list(res.sequence)}


_P = Param

IDENTITIES: dict[str, Identity] = {}


def _register(identity: Identity):
    IDENTITIES[identity.name] = identity


_register(Identity(
    "joint_lt_upcross",
    (_P("x"), _P("b"), _P("q"), _P("p"), _P("lam")),
    lambda m, p: occupation.joint_lt_upcross(m, p["x"], p["b"], p["q"], p["p"], p["lam"]),
    _fn("occupation_at_upcross", {"lam": "lam", "b": "b"}, q_key="q", p_key="p"),
))
_register(Identity(
    "lt_occupation_inf",
    (_P("x"), _P("p"), _P("lam")),
    lambda m, p: occupation.lt_occupation_inf(m, p["x"], p["p"], p["lam"]),
    _fn("occupation_poisson", {"lam": "lam"}, p_key="p"),
))
_register(Identity(
    "occupation_law",
    (_P("x"), _P("lam"), _P("r")),
    _eval_occupation_law,
))
_register(Identity(
    "ruin_prob_sum_exp",
    (_P("x"), _P("p"), _P("lam")),
    lambda m, p: parisian.ruin_prob_sum_exp(m, p["x"], p["p"], p["lam"]),
    _fn("rho_sum_exp", {"p": "p", "lam": "lam"}),
))
_register(Identity(
    "gs_lt_two_sided",
    (_P("x"), _P("b"), _P("q"), _P("p"), _P("lam"), _P("theta")),
    lambda m, p: parisian.gs_lt_two_sided(m, p["x"], p["b"], p["q"], p["p"], p["lam"], p["theta"]),
    _fn("rho_sum_exp", {"p": "p", "lam": "lam", "b": "b"}, q_key="q", theta_key="theta"),
))
_register(Identity(
    "gs_lt_infinite",
    (_P("x"), _P("q"), _P("p"), _P("lam"), _P("theta")),
    lambda m, p: parisian.gs_lt_infinite(m, p["x"], p["q"], p["p"], p["lam"], p["theta"]),
    _fn("rho_sum_exp", {"p": "p", "lam": "lam"}, q_key="q", theta_key="theta"),
))
_register(Identity(
    "up_cross_three_barrier",
    (_P("x"), _P("b"), _P("a"), _P("q"), _P("p"), _P("lam")),
    lambda m, p: parisian.up_cross_three_barrier(m, p["x"], p["b"], p["a"], p["q"], p["p"], p["lam"]),
    _fn("rho_sum_exp", {"p": "p", "lam": "lam", "b": "b", "a": "a"},
        success="upcross", q_key="q"),
))
_register(Identity(
    "up_cross_before_ruin",
    (_P("x"), _P("b"), _P("q"), _P("p"), _P("lam")),
    lambda m, p: parisian.up_cross_before_ruin(m, p["x"], p["b"], p["q"], p["p"], p["lam"]),
    _fn("rho_sum_exp", {"p": "p", "lam": "lam", "b": "b"}, success="upcross", q_key="q"),
))
_register(Identity(
    "gerber_shiu_density",
    (_P("x"), _P("b"), _P("q"), _P("p"), _P("lam"), _P("y")),
    lambda m, p: parisian.gerber_shiu_density(m, p["x"], p["b"], p["q"], p["p"], p["lam"], p["y"]),
))
_register(Identity(
    "lt_occupation_exp_horizon",
    (_P("x"), _P("p"), _P("q"), _P("lam")),
    lambda m, p: parisian.lt_occupation_exp_horizon(m, p["x"], p["p"], p["q"], p["lam"]),
    _fn("occupation_poisson", {"lam": "lam", "exp_horizon_rate": "q"}, p_key="p"),
))
_register(Identity(
    "ruin_prob_erlang2",
    (_P("x"), _P("lam")),
    lambda m, p: parisian.ruin_prob_erlang2(m, p["x"], p["lam"]),
    _fn("rho_erlang", {"lam": "lam"}, n=2.0, construction="observation"),
))
_register(Identity(
    "gs_density_e2",
    (_P("x"), _P("b"), _P("q"), _P("lam"), _P("y")),
    lambda m, p: parisian.gs_density_e2(m, p["x"], p["b"], p["q"], p["lam"], p["y"]),
))
_register(Identity(
    "gs_lt_two_sided_e2",
    (_P("x"), _P("b"), _P("q"), _P("lam"), _P("theta")),
    lambda m, p: parisian.gs_lt_two_sided_e2(m, p["x"], p["b"], p["q"], p["lam"], p["theta"]),
    _fn("rho_erlang", {"lam": "lam", "b": "b"}, n=2.0, construction="observation",
        q_key="q", theta_key="theta"),
))
_register(Identity(
    "gs_lt_infinite_e2",
    (_P("x"), _P("q"), _P("lam"), _P("theta")),
    lambda m, p: parisian.gs_lt_infinite_e2(m, p["x"], p["q"], p["lam"], p["theta"]),
    _fn("rho_erlang", {"lam": "lam"}, n=2.0, construction="observation",
        q_key="q", theta_key="theta"),
))
_register(Identity(
    "up_cross_e2",
    (_P("x"), _P("b"), _P("q"), _P("lam")),
    lambda m, p: parisian.up_cross_e2(m, p["x"], p["b"], p["q"], p["lam"]),
    _fn("rho_erlang", {"lam": "lam", "b": "b"}, n=2.0, construction="observation",
        success="upcross", q_key="q"),
))
_register(Identity(
    "ruin_prob_erlang_n",
    (_P("x"), _P("lam"), _P("n", "int")),
    _eval_erlang_n,
    _fn("rho_erlang", {"lam": "lam", "n": "n"}, construction="observation"),
))
_register(Identity(
    "fixed_delay_approx",
    (_P("x"), _P("r"), _P("n", "int")),
    _eval_fixed_delay,
    _fn("kappa_fixed", {"r": "r"}),
    informational=True,  # Erlang(n, n/r) approximation vs the exact fixed-delay law
))
_register(Identity(
    "T0_joint_lt",
    (_P("x"), _P("b"), _P("q"), _P("lam"), _P("theta")),
    lambda m, p: parisian.t0_joint_lt(m, p["x"], p["b"], p["q"], p["lam"], p["theta"]),
    _fn("T0_minus", {"lam": "lam", "b": "b"}, q_key="q", theta_key="theta"),
))
_register(Identity(
    "upcross_before_T0_two_sided",
    (_P("x"), _P("b"), _P("a"), _P("q"), _P("lam")),
    lambda m, p: parisian.upcross_before_t0_two_sided(m, p["x"], p["b"], p["a"], p["q"], p["lam"]),
    _fn("T0_minus", {"lam": "lam", "b": "b", "a": "a"}, success="upcross", q_key="q"),
))
_register(Identity(
    "upcross_before_T0",
    (_P("x"), _P("b"), _P("q"), _P("lam")),
    lambda m, p: parisian.upcross_before_t0(m, p["x"], p["b"], p["q"], p["lam"]),
    _fn("T0_minus", {"lam": "lam", "b": "b"}, success="upcross", q_key="q"),
))
_register(Identity(
    "delayed_W_functional",
    (_P("x"), _P("b"), _P("a"), _P("q"), _P("lam"), _P("p"), _P("z")),
    lambda m, p: parisian.delayed_w_functional(m, p["x"], p["b"], p["a"], p["q"], p["lam"],
                                               p["p"], p["z"]),
    _fn("T0_w_weight", {"lam": "lam", "b": "b", "a": "a", "pw": "p", "shift": "z"}, q_key="q"),
))


def identity_names() -> list[str]:
    return sorted(IDENTITIES)


def validatable_names() -> list[str]:
    return sorted(n for n, ident in IDENTITIES.items() if ident.mc_functional is not None)


def evaluate_identity(name: str, model: LevyModel, params: dict,
                      mc_config: Optional[McConfig] = None, workers: int = 1):
    """Evaluate a registry identity.  Returns (value, extras dict)."""
    ident = _lookup(name)
    prm = _coerce_params(ident, params)
    if name in ("ruin_prob_erlang_n", "fixed_delay_approx"):
        return ident.evaluate(model, prm, mc_config=mc_config, workers=workers)
    out = ident.evaluate(model, prm)
    if isinstance(out, tuple):
        return out
    return out, {}


def mc_counterpart(name: str, model: LevyModel, params: dict, config: McConfig,
                   workers: int = 1):
    """Run the identity's Monte Carlo counterpart; KeyError if there is none.

    Returns (estimate, functional) so reports can record what was simulated.
    """
    ident = _lookup(name)
    if ident.mc_functional is None:
        raise KeyError(name)
    prm = _coerce_params(ident, params)
    fn = ident.mc_functional(prm)
    return estimate(model, config, fn, workers=workers), fn


def _lookup(name: str) -> Identity:
    try:
        return IDENTITIES[name]
    except KeyError:
        raise KeyError(name) from None


def _coerce_params(ident: Identity, params: dict) -> dict:
    unknown = set(params) - {p.name for p in ident.params}
    if unknown:
        raise UsageError(f"unknown parameters for {ident.name}: {sorted(unknown)}")
    missing = {p.name for p in ident.params} - set(params)
    if missing:
        raise UsageError(f"missing parameters for {ident.name}: {sorted(missing)}")
    out = {}
    for p in ident.params:
        raw = params[p.name]
        if p.kind == "int":
            val = int(raw)
            if val != float(raw):
                raise UsageError(f"parameter {p.name} must be an integer")
            out[p.name] = val
        else:
            out[p.name] = float(raw)
    return out
