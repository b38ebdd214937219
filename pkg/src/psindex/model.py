"""Single-slot dynamics for egalitarian processor-sharing queues.

A server holding x jobs completes each of them independently with
probability q/x during one slot, so the departure count is
Binomial(x, q/x) and its mean is exactly q whenever x >= 1. An active
server may additionally admit one Bernoulli(p) arrival. These laws,
the per-slot holding cost, and a drift certificate for the stability
region are the vocabulary every other module builds on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

PMF_SUM_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    Carries the trailing iterate and residual so callers can report
    exactly where the iteration stalled.
    """

    def __init__(self, message: str, iterate: float | None = None,
                 residual: float | None = None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


@dataclass(frozen=True)
class ServerParams:
    """One server: service capacity q per slot and holding cost rate."""

    q: float
    cost_c: float


@dataclass(frozen=True)
class SystemConfig:
    """A bank of servers fed by a single Bernoulli arrival stream.

    Exactly one server is scheduled (made active) per slot; only the
    active server can admit the slot's arrival. `buffer` caps each
    queue length, and arrivals that would exceed it are dropped.
    `strict_stability_mode` additionally demands the ordered-capacity
    and q_min > 2p conditions under which the drift certificate exists.
    """

    arrival_p: float
    servers: tuple[ServerParams, ...]
    buffer: int
    strict_stability_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(self.servers))

    @property
    def num_servers(self) -> int:
        return len(self.servers)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class LyapunovCertificate:
    """Witness (a, b) for geometric drift of the total queue length.

    b is the margin by which the exponential drift inequality holds at
    parameter a; any b > 0 certifies stability of the always-work
    policy class under q_min > 2p.
    """

    a: float
    b: float


class Pmf:
    """Probability mass function on a finite set of integer states."""

    __slots__ = ("states", "probs")

    def __init__(self, states, probs):
        states = np.asarray(states, dtype=np.int64)
        probs = np.asarray(probs, dtype=np.float64)
        if states.ndim != 1 or states.shape != probs.shape:
            raise ValueError("states and probs must be 1-d and same length")
        if states.size == 0:
            raise ValueError("empty pmf")
        if np.any(np.diff(states) <= 0):
            raise ValueError("states must be distinct and ascending")
        if np.any(probs < 0.0) or np.any(probs > 1.0 + PMF_SUM_TOL):
            raise ValueError("probabilities outside [0, 1]")
        total = float(probs.sum())
        if abs(total - 1.0) >= PMF_SUM_TOL:
            raise ValueError(f"pmf sums to {total!r}, deviation too large "
                             "to be float roundoff")
        if total != 1.0:
            probs = probs / total
        states.setflags(write=False)
        probs.setflags(write=False)
        self.states = states
        self.probs = probs

    def mean(self) -> float:
        return float(self.states @ self.probs)

    def as_dict(self) -> dict[int, float]:
        return {int(s): float(w) for s, w in zip(self.states, self.probs)}

    def dense(self, size: int) -> np.ndarray:
        """Probability vector over states 0..size-1."""
        if int(self.states[-1]) >= size:
            raise ValueError("pmf support exceeds requested vector size")
        out = np.zeros(size)
        out[self.states] = self.probs
        return out

    def __repr__(self):
        return f"Pmf({self.as_dict()})"


def validate_config(cfg: SystemConfig) -> ValidationReport:
    """Check a SystemConfig against its domain constraints.

    Returns a report rather than raising so callers can surface every
    violation at once. Strict stability mode adds the decreasing-q and
    q_min > 2p requirements; without it those are deliberately skipped
    because the buffer already guarantees a finite state space.
    """
    v: list[str] = []
    if not (0.0 < cfg.arrival_p < 1.0):
        v.append("arrival_p outside (0,1)")
    if len(cfg.servers) == 0:
        v.append("servers list is empty")
    for i, s in enumerate(cfg.servers):
        if not (0.0 < s.q < 1.0):
            v.append(f"servers[{i}].q={s.q:g} outside (0,1)")
        if not s.cost_c > 0.0:
            v.append(f"servers[{i}].cost_c={s.cost_c:g} not > 0")
    if cfg.buffer < 1:
        v.append(f"buffer={cfg.buffer} not >= 1")
    if cfg.strict_stability_mode and cfg.servers:
        qs = [s.q for s in cfg.servers]
        if any(a <= b for a, b in zip(qs, qs[1:])):
            v.append("q values not strictly decreasing")
        q_min = min(qs)
        if not q_min > 2.0 * cfg.arrival_p:
            v.append(f"q_min={q_min:g} <= 2p={2.0 * cfg.arrival_p:g}")
    return ValidationReport(tuple(v))


def departure_pmf(x: int, q: float) -> Pmf:
    """Law of the departure count from a server holding x jobs.

    Binomial(x, q/x) for x >= 1; a point mass at zero for an empty
    server. The mean equals q exactly, independent of x.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie in (0,1)")
    if x == 0:
        return Pmf([0], [1.0])
    d = np.arange(x + 1)
    return Pmf(d, binom.pmf(d, x, q / x))


def next_state_pmf(x: int, q: float, p: float, active: bool,
                   buffer: int) -> Pmf:
    """One-slot transition law for a single queue.

    The new length is x minus the departures, plus one admitted arrival
    when the server is active and the Bernoulli(p) arrival occurs,
    clamped at the buffer. A passive server admits nothing.
    """
    if buffer < 1:
        raise ValueError("buffer must be >= 1")
    if not 0 <= x <= buffer:
        raise ValueError(f"state x={x} outside [0, buffer={buffer}]")
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie in (0,1)")
    dep = departure_pmf(x, q)
    out = np.zeros(min(x + 1, buffer) + 1)
    if active:
        for d, w in zip(dep.states, dep.probs):
            y = x - int(d)
            out[y] += w * (1.0 - p)
            out[min(y + 1, buffer)] += w * p
    else:
        for d, w in zip(dep.states, dep.probs):
            out[x - int(d)] += w
    keep = out > 0.0
    return Pmf(np.flatnonzero(keep), out[keep])


def transition_row(x: int, q: float, p: float, active: bool,
                   n: int) -> np.ndarray:
    """Dense transition vector over states 0..n, with the buffer at n."""
    return next_state_pmf(x, q, p, active, n).dense(n + 1)


def stage_cost(x: int, active: bool, lam: float, cost_c: float) -> float:
    """Per-slot cost: holding cost plus the passivity charge lam.

    lam may be negative, in which case staying passive is subsidised.
    """
    return cost_c * x + (0.0 if active else lam)


def lyapunov_margin(p: float, q_min: float, a: float) -> float:
    """Margin b of the drift inequality at candidate parameter a."""
    return 0.5 * q_min * (1.0 - math.exp(-a)) - p * (math.exp(a) - 1.0)


def lyapunov_certificate(p: float, q_min: float) -> LyapunovCertificate | None:
    """Find the drift parameter a in (0, 5] maximising the margin.

    The margin is strictly concave in a with positive slope at 0 iff
    q_min > 2p, so bisection on its derivative locates the maximiser to
    1e-10. Returns None when no positive-margin parameter exists.
    """
    if not (0.0 < p < 1.0) or not (0.0 < q_min < 1.0):
        raise ValueError("p and q_min must lie in (0,1)")
    if q_min <= 2.0 * p:
        return None

    def slope(a: float) -> float:
        return 0.5 * q_min * math.exp(-a) - p * math.exp(a)

    lo, hi = 0.0, 5.0
    if slope(hi) > 0.0:
        a = hi
    else:
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            if slope(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        a = 0.5 * (lo + hi)
    b = lyapunov_margin(p, q_min, a)
    if b <= 0.0:
        return None
    return LyapunovCertificate(a=a, b=b)
