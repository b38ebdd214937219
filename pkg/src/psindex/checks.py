"""Numerical certification of the model's structural properties.

Each check re-verifies one claim the index policy leans on: exactness
of the departure law, stationary-mass monotonicity and stochastic
dominance of threshold chains, the shape of the optimal threshold cost
curve, threshold structure and indexability of the single-queue
problem, and monotone convex relative values. The CLI `properties`
subcommand runs the whole list and reports pass/fail per item.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dp, threshold, whittle
from .model import SystemConfig, departure_pmf, next_state_pmf

STRUCT_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_departure_law(x_max: int = 200) -> CheckResult:
    worst = 0.0
    for q in np.arange(0.05, 1.0, 0.1):
        for x in range(0, x_max + 1):
            pmf = departure_pmf(x, float(q))
            worst = max(worst, abs(float(pmf.probs.sum()) - 1.0))
            if x >= 1:
                worst = max(worst, abs(pmf.mean() - float(q)))
    return CheckResult("departure_law_mean_and_mass", worst <= 1e-12,
                       f"max deviation {worst:.3e}")


def check_active_law_is_convolution(x_max: int = 30) -> CheckResult:
    """Active law must equal departure law convolved with the arrival."""
    worst = 0.0
    for q, p in ((0.5, 0.4), (0.9, 0.2), (0.3, 0.25)):
        for x in range(0, x_max + 1):
            buffer = x_max + 1
            active = next_state_pmf(x, q, p, True, buffer).dense(buffer + 1)
            dep = departure_pmf(x, q)
            manual = np.zeros(buffer + 1)
            for d, w in zip(dep.states, dep.probs):
                manual[x - int(d)] += w * (1.0 - p)
                manual[min(x - int(d) + 1, buffer)] += w * p
            worst = max(worst, float(np.max(np.abs(active - manual))))
            passive = next_state_pmf(x, q, p, False, buffer)
            if passive.states.min() < 0 or passive.states.max() > x:
                return CheckResult("active_law_convolution", False,
                                   f"passive support escapes [0,{x}]")
    return CheckResult("active_law_convolution", worst <= 1e-12,
                       f"max gap {worst:.3e}")


def check_passive_shift_monotone(x_max: int = 60) -> CheckResult:
    """A longer backlog stays stochastically longer after departures.

    The departure counts themselves cannot be stochastically ordered
    across x (they share the mean q), but the post-departure length
    x - D is: its CDF falls pointwise as x grows. This row monotonicity
    is what the chain-dominance argument rests on.
    """
    worst = 0.0
    for q in (0.2, 0.5, 0.8, 0.95):
        prev = None
        for x in range(0, x_max + 1):
            dep = departure_pmf(x, q).dense(x + 1)
            # Entry j is P(x - D <= j) = P(D >= x - j).
            cdf = np.cumsum(dep[::-1])
            if prev is not None:
                worst = max(worst, float(np.max(cdf[: len(prev)] - prev)))
            prev = cdf
    return CheckResult("passive_shift_monotone", worst <= 1e-12,
                       f"max CDF increase {worst:.3e}")


def check_stationary_mass_monotone(k_max: int = 40) -> CheckResult:
    worst = 0.0
    for q in np.arange(0.1, 1.0, 0.1):
        for p in np.arange(0.1, 1.0, 0.1):
            if q <= p:
                continue
            prev = None
            for k in range(0, k_max + 1):
                mass = threshold.cumulative_active_mass(k, float(q), float(p))
                if prev is not None:
                    worst = min(worst, mass - prev)
                prev = mass
    return CheckResult("stationary_mass_monotone", worst >= -1e-12,
                       f"min mass increment {worst:.3e}")


def check_chain_dominance(k_max: int = 40) -> CheckResult:
    for q in np.arange(0.1, 1.0, 0.1):
        for p in np.arange(0.1, 1.0, 0.1):
            if q <= p:
                continue
            for k in range(0, k_max + 1):
                if not threshold.dominance_check(k, float(q), float(p)):
                    return CheckResult(
                        "chain_dominance", False,
                        f"failed at k={k}, q={q:.1f}, p={p:.1f}")
    return CheckResult("chain_dominance", True, "all grid points dominated")


def check_threshold_cost_curve(cfg: SystemConfig, k_max: int = 60
                               ) -> CheckResult:
    """Optimal threshold cost: concave, non-decreasing, slope <= 1."""
    lams = np.arange(-20.0, 20.0 + 1e-9, 0.25)
    for s in cfg.servers:
        beta = np.array([threshold.optimal_threshold_cost(
            float(l), s.cost_c, s.q, cfg.arrival_p, k_max)[0] for l in lams])
        d1 = np.diff(beta)
        d2 = np.diff(d1)
        unit = beta[4:] - beta[:-4]  # grid step is 0.25
        if np.min(d1) < -STRUCT_SLACK:
            return CheckResult("threshold_cost_curve", False,
                               f"decreasing at q={s.q}")
        if np.max(d2) > STRUCT_SLACK:
            return CheckResult("threshold_cost_curve", False,
                               f"convex kink at q={s.q}")
        if np.max(unit) > 1.0 + STRUCT_SLACK:
            return CheckResult("threshold_cost_curve", False,
                               f"unit increment above 1 at q={s.q}")
    return CheckResult("threshold_cost_curve", True,
                       f"{len(cfg.servers)} servers over {len(lams)} charges")


def check_value_solver_consistency(cfg: SystemConfig) -> CheckResult:
    """Fixed-threshold solve must reproduce the chain's average cost."""
    worst = 0.0
    for s in cfg.servers:
        for lam in (-5.0, 0.0, 2.5, 10.0):
            beta_min, k = threshold.optimal_threshold_cost(
                lam, s.cost_c, s.q, cfg.arrival_p, 60)
            n = max(2 * max(k, 1), 40)
            sol = whittle.solve_value(lam, k, s, cfg.arrival_p, n)
            worst = max(worst, abs(sol.beta - beta_min))
    return CheckResult("value_solver_consistency", worst <= 1e-6,
                       f"max |beta gap| {worst:.3e}")


def check_single_queue_structure(cfg: SystemConfig, n: int = 120,
                                 lam_step: float = 0.5) -> CheckResult:
    """Threshold policies, indexability, monotone convex values.

    Sweeps the charge grid per server, asserting the greedy active set
    is a downward-closed interval, the threshold never decreases in
    lam, V is non-decreasing with non-decreasing increments on the
    recurrent range, and the admission gain is monotone.
    """
    lams = np.arange(-20.0, 20.0 + 1e-9, lam_step)
    half = n // 2
    for s in cfg.servers:
        v_warm = None
        prev_k = None
        for lam in lams:
            sol = dp.single_queue_rvi(float(lam), s, cfg.arrival_p, n,
                                      tol=1e-10, v_init=v_warm)
            v_warm = sol.v
            k, interval = dp.active_interval(sol.policy, upto=half)
            if not interval:
                return CheckResult("single_queue_structure", False,
                                   f"active set not an interval at q={s.q}, "
                                   f"lam={lam:g}")
            if prev_k is not None and k < prev_k:
                return CheckResult("single_queue_structure", False,
                                   f"threshold dropped at q={s.q}, "
                                   f"lam={lam:g}")
            prev_k = k
            top = max(k + 1, 1)
            dv = np.diff(sol.v[: top + 1])
            monotone = dv.size == 0 or np.min(dv) >= -STRUCT_SLACK
            convex = dv.size < 2 or np.min(np.diff(dv)) >= -STRUCT_SLACK
            if not (monotone and convex):
                return CheckResult("single_queue_structure", False,
                                   f"value structure broken at q={s.q}, "
                                   f"lam={lam:g}")
            gain = dp.admission_gain_profile(sol.v, s.q, cfg.arrival_p)
            if np.min(np.diff(gain[:half])) < -STRUCT_SLACK:
                return CheckResult("single_queue_structure", False,
                                   f"admission gain not monotone at q={s.q}, "
                                   f"lam={lam:g}")
    return CheckResult("single_queue_structure", True,
                       f"{len(cfg.servers)} servers, {len(lams)} charges")


def check_index_agreement(cfg: SystemConfig, x_max: int = 10) -> CheckResult:
    """Incremental index iteration vs the bisection reference."""
    n = whittle.default_truncation(x_max, cfg.buffer)
    worst = 0.0
    for s in cfg.servers:
        warm = 0.0
        for x in range(0, x_max + 1):
            lam = whittle.compute_index(
                x, s, cfg.arrival_p, n,
                whittle.IndexIterationConfig(lambda0=warm))
            ref = whittle.bisect_index(x, s, cfg.arrival_p, n)
            worst = max(worst, abs(lam - ref))
            warm = lam
    return CheckResult("index_agreement", worst <= 1e-4,
                       f"max |incremental - bisection| {worst:.3e}")


def run_property_suite(cfg: SystemConfig) -> list[CheckResult]:
    return [
        check_departure_law(),
        check_active_law_is_convolution(),
        check_passive_shift_monotone(),
        check_stationary_mass_monotone(),
        check_chain_dominance(),
        check_threshold_cost_curve(cfg),
        check_value_solver_consistency(cfg),
        check_single_queue_structure(cfg),
        check_index_agreement(cfg),
    ]
