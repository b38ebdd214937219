"""Whittle index computation for a single processor-sharing queue.

The index of state x is the passivity charge lam at which activating
and resting the server are equally attractive, assuming states at and
below x use the active dynamics and states above use the passive ones.
With the threshold structure fixed, the relative values solve a linear
system that is affine in lam, so the balance gap has a single root.
Two independent routes find it: the incremental fixed-point scheme
(compute_index) and a scan-and-bisect root finder (bisect_index) kept
as the reference.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .model import ConvergenceError, ServerParams, SystemConfig, transition_row

VALUE_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class IndexIterationConfig:
    """Knobs of the incremental index iteration."""

    gamma: float = 0.1
    tol: float = 1e-6
    max_iter: int = 100_000
    lambda0: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must lie in (0, 1]")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class ValueSolution:
    """Relative values of a fixed-threshold policy at a fixed charge."""

    lam: float
    threshold_x: int
    n: int
    v: np.ndarray
    beta: float

    def __post_init__(self):
        self.v.setflags(write=False)


class _FixedThresholdSystem:
    """Linear system for the relative values of a threshold policy.

    Unknowns are V(0..n) and beta; the coefficient matrix does not
    depend on lam (only the right-hand side does), so it is factored
    once and re-solved per lam. States above n clamp there, which is
    harmless while the recurrent class sits well inside the truncation.
    """

    def __init__(self, server: ServerParams, arrival_p: float,
                 threshold_x: int, n: int):
        if n < 1 or n < threshold_x + 1:
            raise ValueError("truncation n must be >= max(1, threshold_x+1)")
        if threshold_x < -1:
            raise ValueError("threshold_x must be >= -1")
        self.server = server
        self.arrival_p = arrival_p
        self.threshold_x = threshold_x
        self.n = n
        q, p = server.q, arrival_p
        m = n + 2
        a = np.zeros((m, m))
        b0 = np.zeros(m)
        b1 = np.zeros(m)
        for y in range(n + 1):
            active = y <= threshold_x
            a[y, : n + 1] = -transition_row(y, q, p, active, n)
            a[y, y] += 1.0
            a[y, n + 1] = 1.0
            b0[y] = server.cost_c * y
            if not active:
                b1[y] = 1.0
        a[n + 1, 0] = 1.0  # pins V(0) = 0
        self._a = a
        self._b0 = b0
        self._b1 = b1
        self._lu = lu_factor(a)
        # Balance rows are evaluated at the threshold state itself.
        x = max(threshold_x, 0)
        self.active_row = transition_row(x, q, p, True, n)
        self.passive_row = transition_row(x, q, p, False, n)

    def solve(self, lam: float) -> ValueSolution:
        b = self._b0 + lam * self._b1
        u = lu_solve(self._lu, b)
        u += lu_solve(self._lu, b - self._a @ u)  # one refinement step
        resid = float(np.max(np.abs(self._a @ u - b)))
        if resid > VALUE_RESIDUAL_TOL:
            raise RuntimeError(f"value system residual {resid:.3e} exceeds "
                               f"{VALUE_RESIDUAL_TOL:g}")
        return ValueSolution(lam=lam, threshold_x=self.threshold_x, n=self.n,
                             v=u[: self.n + 1], beta=float(u[self.n + 1]))

    def gap(self, lam: float) -> float:
        """Active-minus-passive continuation gap at the threshold state."""
        v = self.solve(lam).v
        return float(self.active_row @ v - self.passive_row @ v) - lam


def solve_value(lam: float, threshold_x: int, server: ServerParams,
                arrival_p: float, n: int) -> ValueSolution:
    """Relative values and average cost of a fixed-threshold policy."""
    return _FixedThresholdSystem(server, arrival_p, threshold_x, n).solve(lam)


def index_residual(lam: float, x: int, server: ServerParams,
                   arrival_p: float, n: int) -> float:
    """Balance gap at state x under charge lam; zero at the index."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return _FixedThresholdSystem(server, arrival_p, x, n).gap(lam)


def compute_index(x: int, server: ServerParams, arrival_p: float, n: int,
                  iter_cfg: IndexIterationConfig | None = None) -> float:
    """Whittle index of state x by the incremental balance iteration.

    Repeats lam <- lam + gamma * gap(lam) until the gap is within tol,
    which also bounds the step size by gamma * tol. Raises
    ConvergenceError with the trailing iterate when max_iter is hit;
    bisect_index is the fallback reference in that case.
    """
    cfg = iter_cfg or IndexIterationConfig()
    system = _FixedThresholdSystem(server, arrival_p, x, n)
    lam = cfg.lambda0
    gap = system.gap(lam)
    for _ in range(cfg.max_iter):
        if abs(gap) <= cfg.tol:
            return lam
        lam = lam + cfg.gamma * gap
        gap = system.gap(lam)
    if abs(gap) <= cfg.tol:
        return lam
    raise ConvergenceError(
        f"index iteration for state {x} stopped at lam={lam:.9g} with "
        f"residual {gap:.3e} after {cfg.max_iter} iterations",
        iterate=lam, residual=gap)


def bisect_index(x: int, server: ServerParams, arrival_p: float, n: int,
                 lo: float = -50.0, hi: float = 50.0,
                 halvings: int = 60) -> float:
    """Reference root finder for the balance gap.

    Scans [lo, hi] for a sign change, doubling the window outward when
    the scan misses (indices grow quickly with x), then bisects. The
    gap is affine in lam for a fixed threshold, so the root is unique.
    """
    system = _FixedThresholdSystem(server, arrival_p, x, n)
    span = hi - lo
    for _ in range(40):
        grid = np.linspace(lo, hi, 201)
        vals = [system.gap(g) for g in grid]
        bracket = None
        for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
            if fa == 0.0:
                return float(a)
            if fa * fb < 0.0:
                bracket = (a, b, fa)
                break
        if bracket is not None:
            break
        span *= 2.0
        lo -= span / 2.0
        hi += span / 2.0
    else:
        raise ConvergenceError("no sign change found for the balance gap")
    a, b, fa = bracket
    for _ in range(halvings):
        mid = 0.5 * (a + b)
        fm = system.gap(mid)
        if fm == 0.0:
            return float(mid)
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


@dataclass(frozen=True)
class IndexTable:
    """Whittle indices per server for states 0..x_max.

    Entries beyond x_max are served by linear extrapolation through
    the last two computed points, matching how rarely such states are
    visited in a stable system.
    """

    entries: np.ndarray  # shape (num_servers, x_max + 1)
    x_max: int

    def __post_init__(self):
        if self.entries.ndim != 2 or self.entries.shape[1] != self.x_max + 1:
            raise ValueError("entries must be (num_servers, x_max + 1)")
        if np.any(np.diff(self.entries, axis=1) < -1e-7):
            raise ValueError("indices must be non-decreasing in x")
        self.entries.setflags(write=False)

    @property
    def num_servers(self) -> int:
        return int(self.entries.shape[0])

    def lookup(self, server: int, x: int) -> float:
        if x < 0:
            raise ValueError("x must be >= 0")
        row = self.entries[server]
        if x <= self.x_max:
            return float(row[x])
        slope = float(row[self.x_max] - row[self.x_max - 1])
        return float(row[self.x_max]) + (x - self.x_max) * slope

    def dense_row(self, server: int, size: int) -> np.ndarray:
        """Indices for states 0..size-1, extrapolating past x_max."""
        return np.array([self.lookup(server, x) for x in range(size)])


def default_truncation(x_max: int, buffer: int) -> int:
    """State-space cut for index computation: max(2 * x_max, buffer)."""
    return max(2 * x_max, buffer)


def build_index_table(cfg: SystemConfig, x_max: int,
                      iter_cfg: IndexIterationConfig | None = None,
                      n: int | None = None) -> IndexTable:
    """Compute the index of every state 0..x_max for every server.

    Each state is solved by compute_index, warm-started at the previous
    state's index since indices increase. A non-convergent cell aborts
    the whole table and names the offending (server, state).
    """
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    base = iter_cfg or IndexIterationConfig()
    n = default_truncation(x_max, cfg.buffer) if n is None else n
    entries = np.zeros((cfg.num_servers, x_max + 1))
    for i, server in enumerate(cfg.servers):
        warm = base.lambda0
        for x in range(x_max + 1):
            try:
                lam = compute_index(x, server, cfg.arrival_p, n,
                                    replace(base, lambda0=warm))
            except ConvergenceError as e:
                raise ConvergenceError(
                    f"index table aborted at server {i}, state {x}: {e}",
                    iterate=e.iterate, residual=e.residual) from e
            entries[i, x] = lam
            warm = lam
    return IndexTable(entries=entries, x_max=x_max)
