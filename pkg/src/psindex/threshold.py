"""Recurrent chains induced by single-queue threshold policies.

A threshold policy with parameter k keeps the server active on states
{0, ..., k} and passive above. Started empty, the queue then lives on
{0, ..., k+1}: it can only climb by admitting arrivals, and admissions
stop one step above the threshold. The convention k = -1 means never
active, whose recurrent class is the single state {0}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import next_state_pmf

STATIONARY_TOL = 1e-10


@dataclass(frozen=True)
class RecurrentChain:
    """Transition matrix of a threshold policy on its recurrent class."""

    k: int
    q: float
    p: float
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.k + 2, self.k + 2):
            raise ValueError("matrix must cover states 0..k+1")
        if np.any(m < 0.0) or np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("rows must be probability vectors")
        m.setflags(write=False)


def threshold_chain(k: int, q: float, p: float) -> RecurrentChain:
    """Build the chain on {0, ..., k+1} for threshold k >= 0.

    Row s is the one-slot law with the server active iff s <= k. No
    clamping occurs: from state k+1 the server is passive, so the chain
    cannot leave the class upward.
    """
    if k < 0:
        raise ValueError("threshold_chain needs k >= 0; k = -1 has the "
                         "trivial class {0}")
    n = k + 2
    mat = np.zeros((n, n))
    for s in range(n):
        mat[s, :] = next_state_pmf(s, q, p, s <= k, k + 1).dense(n)
    return RecurrentChain(k=k, q=q, p=p, matrix=mat)


def stationary_distribution(chain: RecurrentChain) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 directly.

    The class is irreducible and aperiodic for q, p in (0,1), so the
    linear system has a unique solution.
    """
    P = chain.matrix
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as e:
        raise ValueError(f"malformed chain, stationary solve failed: {e}")
    if np.any(pi < -STATIONARY_TOL):
        raise ValueError("stationary solve produced negative mass")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
        raise ValueError("stationary residual exceeds tolerance")
    return pi


@lru_cache(maxsize=16384)
def _chain_stats(k: int, q: float, p: float) -> tuple[float, float]:
    """(mean queue length, mass of the top state k+1) under threshold k."""
    if k == -1:
        return 0.0, 0.0
    chain = threshold_chain(k, q, p)
    pi = stationary_distribution(chain)
    mean_len = float(np.arange(k + 2) @ pi)
    return mean_len, float(pi[k + 1])


def cumulative_active_mass(k: int, q: float, p: float) -> float:
    """Stationary probability of the active states {0, ..., k}.

    Equals 1 - pi(k+1); it is non-decreasing in k, which is the
    stationary-mass monotonicity behind index monotonicity.
    """
    _, top = _chain_stats(k, q, p)
    return 1.0 - top


def threshold_average_cost(k: int, lam: float, cost_c: float, q: float,
                           p: float) -> float:
    """Long-run average cost of threshold k with passivity charge lam.

    The only passive recurrent state is k+1, so the cost decomposes as
    cost_c * E[length] + lam * pi(k+1). For k = -1 the queue stays
    empty and pays lam every slot.
    """
    if k == -1:
        return float(lam)
    mean_len, top = _chain_stats(k, q, p)
    return cost_c * mean_len + lam * top


def optimal_threshold_cost(lam: float, cost_c: float, q: float, p: float,
                           k_max: int = 60) -> tuple[float, int]:
    """Minimise the threshold average cost over k in {-1, ..., k_max}.

    A minimum over affine-in-lam functions, hence concave and
    non-decreasing in lam with slope at most 1 (the k = -1 line).
    Returns (best cost, argmin k); ties go to the smaller k.
    """
    best_cost, best_k = float(lam), -1
    for k in range(0, k_max + 1):
        c = threshold_average_cost(k, lam, cost_c, q, p)
        if c < best_cost - 1e-15:
            best_cost, best_k = c, k
    return best_cost, best_k


def dominance_check(k: int, q: float, p: float) -> bool:
    """Certify that raising the threshold enlarges the queue stochastically.

    Embeds the threshold-k chain in the (k+3)-state space of the
    threshold-(k+1) chain by zero-padding the unreachable top row, and
    compares cumulative transition mass through the lower-triangular
    all-ones matrix U: (P @ U)[x, j] is the probability of moving from
    x to a state >= j, so P1 U <= P2 U elementwise says the larger
    threshold pushes every state upward at least as hard.
    """
    p1 = threshold_chain(k, q, p).matrix
    p2 = threshold_chain(k + 1, q, p).matrix
    m = k + 3
    p1_pad = np.zeros((m, m))
    p1_pad[: k + 2, : k + 2] = p1
    u = np.tril(np.ones((m, m)))
    return bool(np.all(p1_pad @ u <= p2 @ u + 1e-12))
