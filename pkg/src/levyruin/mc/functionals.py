"""Path functionals estimable by the oracle, and the occupation accrual rule.

A :class:`PathFunctional` names a simulated quantity (first passages, Parisian
ruin times under the different delay constructions, Poissonian occupation times)
together with the transform applied to the raw path outcome:

    value = 1{event == success_event} * exp(-discount_q * time
                                            + tilt_theta * deficit
                                            - laplace_p * occupation)

Functional names:

* ``occupation_poisson``          total occupation, once-per-excursion accrual
                                  (params: lam; optional exp_horizon_rate)
* ``occupation_poisson_literal``  the overlapping-sum reading of the accrual
                                  (every negative observation adds its full
                                  remaining recovery time); kept because it is
                                  the verbatim summation formula -- it does NOT
                                  match the closed-form identities (see tests)
* ``occupation_poisson_n``        accrual from the n-th consecutive negative
                                  observation (params: lam, n)
* ``occupation_at_upcross``       occupation accrued up to tau_b^+ (params: lam, b)
* ``rho_sum_exp``                 Parisian ruin, delay Exp(p)+Exp(lam) per
                                  excursion (params: p, lam; optional b, a;
                                  construction "clock" or "occupation")
* ``rho_erlang``                  Parisian ruin, Erlang(n, lam) delay (params:
                                  n, lam; optional b; construction "clock" or
                                  "observation")
* ``kappa_fixed``                 Parisian ruin with deterministic delay r
* ``T0_minus``                    first Poisson observation below 0 (params:
                                  lam; optional b, a)
* ``T0_w_weight``                 e^{-q T_0^-} W_pw(X + shift) on {T_0^- first}
                                  (params: lam, b, a, pw, shift)
* ``tau_b_plus`` / ``tau_level_minus``  classical first passages (sanity checks)
"""

from __future__ import annotations

from dataclasses import dataclass, field

EV_NONE = 0
EV_RUIN = 1
EV_UPCROSS = 2
EV_LOWER = 3


@dataclass(frozen=True)
class PathFunctional:
    name: str
    params: dict = field(default_factory=dict)
    x0: float = 0.0
    success_event: str = "ruin"
    discount_q: float = 0.0
    tilt_theta: float = 0.0
    laplace_p: float = 0.0


def excursion_occupation(obs_times, recovery, mode="union", cap=None, n_consec=1):
    """Occupation contributed by one negative excursion.

    ``obs_times``: observation epochs strictly inside the excursion, in order.
    ``recovery``: the excursion's up-crossing time of 0.
    ``mode``: "union" accrues from the n_consec-th observation until recovery
    (every observation inside one excursion extends the same run, so the n-th
    observation in the list is the n-th consecutive negative one); "literal" sums
    the full remaining recovery time over every observation, counting overlaps.
    ``cap``: optional absolute cutoff for finite horizons (union mode only; the
    literal summation has no capped reading).
    """
    if mode == "literal":
        if cap is not None:
            raise ValueError("the literal overlapping sum has no finite-horizon reading")
        return sum(recovery - s for s in obs_times)
    if len(obs_times) < n_consec:
        return 0.0
    start = obs_times[n_consec - 1]
    end = recovery if cap is None else min(recovery, cap)
    return max(end - start, 0.0)
