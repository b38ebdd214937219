"""Server-selection rules: which queue gets the arrival opportunity.

All rules pick exactly one active server per slot, empty system
included. Selection functions are pure; the policy classes wrap them
behind a uniform factory interface so the simulator can hand the
random rule its own generator stream.
"""

from __future__ import annotations

import numpy as np

from .dp import JointSolution
from .model import ServerParams
from .whittle import IndexTable


def whittle_select(state, table: IndexTable) -> int:
    """Activate the server whose current-state index is smallest.

    The index approximates the marginal cost of admitting work there,
    so the cheapest queue takes the arrival. Ties go to the lowest
    server index.
    """
    best, best_val = 0, table.lookup(0, state[0])
    for i in range(1, len(state)):
        val = table.lookup(i, state[i])
        if val < best_val:
            best, best_val = i, val
    return best


def cmu_select(state, servers: tuple[ServerParams, ...]) -> int:
    """Activate the server with the smallest cost_c * x / q score.

    A myopic rule: the score is the holding cost weighted by how long
    the backlog takes to clear, so new work goes where it congests the
    least. Ties go to the lowest server index.
    """
    best, best_val = 0, servers[0].cost_c * state[0] / servers[0].q
    for i in range(1, len(state)):
        val = servers[i].cost_c * state[i] / servers[i].q
        if val < best_val:
            best, best_val = i, val
    return best


def random_select(rng: np.random.Generator, num_servers: int) -> int:
    """Uniform choice among all servers, ignoring the state."""
    return int(rng.integers(num_servers))


def exact_select(state, solution: JointSolution) -> int:
    """Look up the optimal action computed by joint value iteration."""
    return int(solution.policy[tuple(state)])


class WhittlePolicy:
    """Index policy over precomputed (and extrapolated) index tables."""

    name = "whittle"

    def __init__(self, table: IndexTable, max_state: int | None = None):
        self.table = table
        # Dense per-server rows make the per-slot lookup a list index.
        size = (max_state if max_state is not None else table.x_max) + 1
        self._rows = [table.dense_row(i, size).tolist()
                      for i in range(table.num_servers)]

    def selector(self, rng: np.random.Generator):
        rows = self._rows
        num = len(rows)

        def select(state):
            best, best_val = 0, rows[0][state[0]]
            for i in range(1, num):
                val = rows[i][state[i]]
                if val < best_val:
                    best, best_val = i, val
            return best

        return select


class CmuPolicy:
    name = "cmu"

    def __init__(self, servers: tuple[ServerParams, ...]):
        self._weights = [s.cost_c / s.q for s in servers]

    def selector(self, rng: np.random.Generator):
        w = self._weights
        num = len(w)

        def select(state):
            best, best_val = 0, w[0] * state[0]
            for i in range(1, num):
                val = w[i] * state[i]
                if val < best_val:
                    best, best_val = i, val
            return best

        return select


class RandomPolicy:
    name = "random"

    def __init__(self, num_servers: int):
        self.num_servers = num_servers

    def selector(self, rng: np.random.Generator):
        num = self.num_servers

        def select(state):
            return int(rng.integers(num))

        return select


class ExactPolicy:
    name = "exact"

    def __init__(self, solution: JointSolution):
        self._policy = solution.policy.tolist()

    def selector(self, rng: np.random.Generator):
        pol = self._policy

        def select(state):
            node = pol
            for x in state:
                node = node[x]
            return node

        return select
