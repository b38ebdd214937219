"""Average-cost dynamic programming for single queues and server banks.

single_queue_rvi solves the one-queue problem with a passivity charge
and exposes the greedy policy, whose active set should be a downward
closed interval (threshold structure). joint_rvi solves the full bank
on the product state space and is the exact benchmark the index policy
is measured against; brute_force_policy_search cross-checks it by
sheer enumeration on spaces small enough to afford that.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import ConvergenceError, ServerParams, SystemConfig, \
    departure_pmf, next_state_pmf, transition_row

# ---------------------------------------------------------------- #
# single queue                                                     #
# ---------------------------------------------------------------- #


@dataclass(frozen=True)
class SingleQueueSolution:
    lam: float
    n: int
    v: np.ndarray
    beta: float
    policy: np.ndarray  # True where the greedy action is active
    sweeps: int
    span: float

    def __post_init__(self):
        self.v.setflags(write=False)
        self.policy.setflags(write=False)


def single_queue_rvi(lam: float, server: ServerParams, arrival_p: float,
                     n: int, tol: float = 1e-9, max_sweeps: int = 100_000,
                     v_init: np.ndarray | None = None) -> SingleQueueSolution:
    """Relative value iteration for one queue under charge lam.

    Jacobi sweeps with normalisation at state 0, stopping when the span
    of the update difference drops below tol; the average cost is the
    midpoint of that difference's range. The greedy tie at equal action
    values goes to active.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    q, p, c = server.q, arrival_p, server.cost_c
    m = n + 1
    pa = np.zeros((m, m))
    pb = np.zeros((m, m))
    for x in range(m):
        pa[x] = transition_row(x, q, p, True, n)
        pb[x] = transition_row(x, q, p, False, n)
    xs = np.arange(m, dtype=np.float64)
    cost_a = c * xs
    cost_p = c * xs + lam

    v = np.zeros(m) if v_init is None else np.array(v_init, dtype=np.float64)
    for sweep in range(1, max_sweeps + 1):
        tv = np.minimum(cost_a + pa @ v, cost_p + pb @ v)
        diff = tv - v
        span = float(diff.max() - diff.min())
        v = tv - tv[0]
        if span <= tol:
            beta = float(0.5 * (diff.max() + diff.min()))
            qa = cost_a + pa @ v
            qp = cost_p + pb @ v
            return SingleQueueSolution(lam=lam, n=n, v=v, beta=beta,
                                       policy=qa <= qp, sweeps=sweep,
                                       span=span)
    raise ConvergenceError(
        f"relative value iteration did not reach span {tol:g} within "
        f"{max_sweeps} sweeps (last span {span:.3e})", residual=span)


def active_interval(policy: np.ndarray, upto: int | None = None
                    ) -> tuple[int, bool]:
    """Largest active state and whether the active set is {0, ..., k}.

    Truncation can distort the greedy action near the cut, so callers
    usually restrict the check to states <= n/2 via `upto`.
    """
    view = policy if upto is None else policy[: upto + 1]
    idx = np.flatnonzero(view)
    if idx.size == 0:
        return -1, True
    k = int(idx[-1])
    return k, bool(idx.size == k + 1 and idx[0] == 0)


def admission_gain_profile(v: np.ndarray, q: float, p: float) -> np.ndarray:
    """Expected value increase caused by one admitted arrival.

    Entry i is p * E[V(x+1-D) - V(x-D)] at x = i + 1, the quantity whose
    monotonicity in x makes the greedy active set an interval. Defined
    for x = 1..n-1 so the shifted argument stays inside the truncation.
    """
    n = len(v) - 1
    out = np.empty(n - 1)
    for i, x in enumerate(range(1, n)):
        dep = departure_pmf(x, q)
        keep = x - dep.states
        out[i] = p * float(dep.probs @ (v[keep + 1] - v[keep]))
    return out


# ---------------------------------------------------------------- #
# server bank                                                      #
# ---------------------------------------------------------------- #


@dataclass(frozen=True)
class JointSolution:
    v: np.ndarray       # shape (buffer+1,) * num_servers, v[reference] = 0
    beta: float
    policy: np.ndarray  # same shape, entries in 0..num_servers-1
    reference: tuple[int, ...]
    sweeps: int
    span: float

    def __post_init__(self):
        self.v.setflags(write=False)
        self.policy.setflags(write=False)


def _apply_along_axis(mat: np.ndarray, v: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, v, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def _per_server_operators(cfg: SystemConfig):
    b = cfg.buffer
    ops = []
    for s in cfg.servers:
        pa = np.zeros((b + 1, b + 1))
        pb = np.zeros((b + 1, b + 1))
        for x in range(b + 1):
            pa[x] = transition_row(x, s.q, cfg.arrival_p, True, b)
            pb[x] = transition_row(x, s.q, cfg.arrival_p, False, b)
        ops.append((pa, pb))
    return ops


def _expected_values(v: np.ndarray, ops) -> list[np.ndarray]:
    """E^i[V | state] for each candidate active server i."""
    num = len(ops)
    outs = []
    for i in range(num):
        w = v
        for j, (pa, pb) in enumerate(ops):
            w = _apply_along_axis(pa if j == i else pb, w, j)
        outs.append(w)
    return outs


def joint_rvi(cfg: SystemConfig, tol: float = 1e-9,
              max_sweeps: int = 200_000,
              reference: tuple[int, ...] | None = None) -> JointSolution:
    """Optimal average cost for the whole bank by relative value iteration.

    Synchronous sweeps of V <- cost + min_i E^i[V] - V[reference];
    at the fixed point the value at the reference state equals the
    optimal average cost. Ties in the minimising server go to the
    lowest index. Exponential in the number of servers, intended for
    benchmark-sized instances.
    """
    ref = tuple([0] * cfg.num_servers) if reference is None else tuple(reference)
    shape = (cfg.buffer + 1,) * cfg.num_servers
    grids = np.meshgrid(*[np.arange(cfg.buffer + 1)] * cfg.num_servers,
                        indexing="ij")
    cost = sum(s.cost_c * g for s, g in zip(cfg.servers, grids))
    ops = _per_server_operators(cfg)

    v = np.zeros(shape)
    for sweep in range(1, max_sweeps + 1):
        expected = _expected_values(v, ops)
        tv = cost + np.minimum.reduce(expected)
        v_next = tv - v[ref]
        span = float((v_next - v).max() - (v_next - v).min())
        v = v_next
        if span <= tol:
            beta = float(v[ref])
            expected = _expected_values(v, ops)
            policy = np.argmin(np.stack(expected), axis=0)
            return JointSolution(v=v - v[ref], beta=beta,
                                 policy=policy.astype(np.int64),
                                 reference=ref, sweeps=sweep, span=span)
    raise ConvergenceError(
        f"joint relative value iteration did not reach span {tol:g} within "
        f"{max_sweeps} sweeps (last span {span:.3e})", residual=span)


# ---------------------------------------------------------------- #
# enumeration benchmark                                            #
# ---------------------------------------------------------------- #


@dataclass(frozen=True)
class BruteForceResult:
    best_policy: dict
    best_beta: float
    evaluations: tuple  # (policy assignment, beta) per enumerated policy
    states: tuple


def _joint_row(state: tuple[int, ...], active: int,
               cfg: SystemConfig) -> dict:
    """Joint one-slot law as {next_state: prob} via the product measure."""
    laws = [next_state_pmf(x, s.q, cfg.arrival_p, i == active, cfg.buffer)
            for i, (x, s) in enumerate(zip(state, cfg.servers))]
    row: dict = {}
    for combo in itertools.product(*[zip(l.states, l.probs) for l in laws]):
        nxt = tuple(int(c[0]) for c in combo)
        w = 1.0
        for c in combo:
            w *= float(c[1])
        row[nxt] = row.get(nxt, 0.0) + w
    return row


def policy_reachable_states(cfg: SystemConfig, policy) -> tuple:
    """States reachable from all-empty under a fixed policy.

    They form the policy's single recurrent class, since every queue
    can always drain back to empty. Actions outside this set cannot
    influence the average cost.
    """
    return tuple(sorted(_policy_rows(cfg, policy)))


def _policy_rows(cfg: SystemConfig, policy) -> dict:
    empty = tuple([0] * cfg.num_servers)
    rows: dict = {}
    frontier = [empty]
    reach = {empty}
    while frontier:
        s = frontier.pop()
        row = _joint_row(s, policy[s], cfg)
        rows[s] = row
        for nxt in row:
            if nxt not in reach:
                reach.add(nxt)
                frontier.append(nxt)
    return rows


def joint_policy_average_cost(cfg: SystemConfig, policy) -> float:
    """Average holding cost of a fixed stationary policy, started empty.

    `policy` maps each joint state tuple to the active server. Only the
    states reachable from all-empty matter; they form one recurrent
    class because every queue can always drain.
    """
    rows = _policy_rows(cfg, policy)
    states = sorted(rows)
    idx = {s: i for i, s in enumerate(states)}
    m = len(states)
    pmat = np.zeros((m, m))
    for s, row in rows.items():
        for nxt, w in row.items():
            pmat[idx[s], idx[nxt]] = w
    a = pmat.T - np.eye(m)
    a[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    holding = np.array([sum(s.cost_c * x for s, x in zip(cfg.servers, st))
                        for st in states])
    return float(pi @ holding)


def brute_force_policy_search(cfg: SystemConfig,
                              max_policies: int = 100_000) -> BruteForceResult:
    """Enumerate every stationary server assignment and keep the best.

    The policy space has num_servers ** num_states members; anything
    beyond max_policies is refused with the size spelled out. Ties on
    average cost keep the first policy in lexicographic order, which
    prefers lower server indices.
    """
    states = tuple(itertools.product(range(cfg.buffer + 1),
                                     repeat=cfg.num_servers))
    count = cfg.num_servers ** len(states)
    if count > max_policies:
        raise ValueError(
            f"refusing to enumerate {cfg.num_servers}**{len(states)} = "
            f"{count} policies (limit {max_policies})")
    best_beta = np.inf
    best_assign = None
    evaluations = []
    for assign in itertools.product(range(cfg.num_servers),
                                    repeat=len(states)):
        policy = dict(zip(states, assign))
        beta = joint_policy_average_cost(cfg, policy)
        evaluations.append((assign, beta))
        if beta < best_beta - 1e-12:
            best_beta = beta
            best_assign = assign
    return BruteForceResult(best_policy=dict(zip(states, best_assign)),
                            best_beta=float(best_beta),
                            evaluations=tuple(evaluations),
                            states=states)
