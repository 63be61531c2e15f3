"""Exact solutions of tiny models, used as ground truth for the planner.

The coordinator's problem is solved on the tree of virtual histories up to a
horizon ``H``. Because the prescription at every history node is a function
of that node only, a coordination strategy is an assignment of one joint
prescription per node, where a node is identified by the joint innovations
received so far. Beliefs are propagated exactly from the model's tables.

Two routes to the optimum are provided: :func:`optimal_value` does backward
induction over the history tree, :func:`enumerate_optimal` scores every
assignment with :func:`exact_value`. Both break ties toward the
lexicographically smallest assignment in :func:`history_nodes` order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np

from phsplan.model import DecModel, ExactTablesUnavailable
from phsplan.prescriptions import CAPACITY, CapacityError, PrescriptionTable

Atom = tuple[int, tuple[int, ...]]
ExactDistribution = dict[Atom, float]

ENUMERATION_BUDGET = 10**7
TIE_TOL = 1e-12


@dataclass(frozen=True)
class CoordinationStrategy:
    """Joint prescription per virtual-history node (keyed by innovation tuples)."""

    assignment: dict[tuple[int, ...], int]

    def __getitem__(self, history: tuple[int, ...]) -> int:
        return self.assignment[history]

    def as_tuple(self, nodes: list[tuple[int, ...]]) -> tuple[int, ...]:
        return tuple(self.assignment[h] for h in nodes)


def _require_tables(model: DecModel) -> None:
    if not model.has_exact_tables:
        raise ExactTablesUnavailable(f"{model.name} exposes no exact tables")


def history_nodes(model: DecModel, H: int) -> list[tuple[int, ...]]:
    """Every history node of depth < H, breadth-first, innovations ascending."""
    nz = model.n_joint_innovations
    nodes: list[tuple[int, ...]] = []
    layer: list[tuple[int, ...]] = [()]
    for _ in range(H):
        nodes.extend(layer)
        layer = [h + (z,) for h in layer for z in range(nz)]
    return nodes


def strategy_count(model: DecModel, H: int) -> int:
    """``|Gamma| ** (sum_{t<H} |Z|**t)``."""
    size = PrescriptionTable(model).size
    nz = model.n_joint_innovations
    n_nodes = sum(nz**t for t in range(H))
    # guard before exponentiating: the exact power can have trillions of bits
    if size > 1 and n_nodes * math.log2(size) > 64:
        raise CapacityError("strategy count exceeds 2^63")
    count = size**n_nodes
    if count >= CAPACITY:
        raise CapacityError("strategy count exceeds 2^63")
    return count


def initial_belief(model: DecModel) -> ExactDistribution:
    _require_tables(model)
    return dict(model.initial_distribution())


def propagate(
    model: DecModel, belief: ExactDistribution, tables: tuple[tuple[int, ...], ...]
) -> tuple[float, dict[int, tuple[float, ExactDistribution]]]:
    """Expected reward under ``tables`` and the exact posterior for every innovation.

    Returns ``(r, {z: (P(z), posterior)})``, including only innovations with
    positive probability.
    """
    expected = 0.0
    joint: dict[int, dict[Atom, float]] = {}
    for (x, mems), p in belief.items():
        if p == 0.0:
            continue
        u = tuple(t[m] for t, m in zip(tables, mems))
        expected += p * model.reward(x, u)
        for q, x2, y in model.transition_distribution(x, u):
            z, mems2 = model.innovate(mems, u, y)
            branch = joint.setdefault(z, {})
            key = (x2, mems2)
            branch[key] = branch.get(key, 0.0) + p * q
    out = {}
    for z in sorted(joint):
        branch = joint[z]
        pz = sum(branch.values())
        if pz > 0.0:
            out[z] = (pz, {k: v / pz for k, v in sorted(branch.items())})
    return expected, out


def exact_filter(
    model: DecModel, belief: ExactDistribution, tables: tuple[tuple[int, ...], ...], z: int
) -> ExactDistribution:
    """Bayes update of the common-information belief after ``tables`` and ``z``."""
    _, branches = propagate(model, belief, tables)
    if z not in branches:
        raise ValueError(f"innovation {z} has probability 0 under this belief")
    return branches[z][1]


def is_normalized(belief: ExactDistribution, tol: float = 1e-12) -> bool:
    return all(p >= 0.0 for p in belief.values()) and abs(sum(belief.values()) - 1.0) <= tol


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def exact_value(model: DecModel, strategy: CoordinationStrategy | dict, H: int, beta: float) -> float:
    """Expected discounted reward ``sum_{t<H} beta**t r_t`` of a coordination strategy."""
    _require_tables(model)
    assignment = strategy.assignment if isinstance(strategy, CoordinationStrategy) else strategy
    table = PrescriptionTable(model)

    def value(belief: ExactDistribution, hist: tuple[int, ...]) -> float:
        if len(hist) >= H:
            return 0.0
        try:
            g = assignment[hist]
        except KeyError:
            raise ValueError(f"strategy has no prescription for history {hist}") from None
        r, branches = propagate(model, belief, table.tables(g))
        future = sum(pz * value(post, hist + (z,)) for z, (pz, post) in branches.items())
        return r + beta * future

    return value(initial_belief(model), ())


def _best(values: list[float]) -> tuple[float, int]:
    top = max(values)
    for g, v in enumerate(values):
        if v >= top - TIE_TOL:
            return v, g
    raise AssertionError("unreachable")


def _solve(model, table, belief, hist, H, beta, assignment) -> float:
    if len(hist) >= H:
        return 0.0
    q = []
    plans = []
    for g in range(table.size):
        r, branches = propagate(model, belief, table.tables(g))
        sub: dict[tuple[int, ...], int] = {}
        future = sum(
            pz * _solve(model, table, post, hist + (z,), H, beta, sub) for z, (pz, post) in branches.items()
        )
        q.append(r + beta * future)
        plans.append(sub)
    v, g = _best(q)
    assignment[hist] = g
    assignment.update(plans[g])
    return v


def optimal_value(model: DecModel, H: int, beta: float) -> tuple[float, CoordinationStrategy]:
    """``V*`` and the optimal strategy, by backward induction over the history tree.

    Ties go to the lowest prescription at each node, shallowest nodes first,
    and nodes the optimal strategy never reaches get prescription 0. This is
    the lexicographically smallest optimal assignment.
    """
    _require_tables(model)
    table = PrescriptionTable(model)
    reached: dict[tuple[int, ...], int] = {}
    v = _solve(model, table, initial_belief(model), (), H, beta, reached)
    assignment = {h: reached.get(h, 0) for h in history_nodes(model, H)}
    return v, CoordinationStrategy(assignment)


def prescription_values(model: DecModel, H: int, beta: float) -> np.ndarray:
    """Optimal continuation value of every root prescription."""
    _require_tables(model)
    table = PrescriptionTable(model)
    out = np.empty(table.size)
    belief = initial_belief(model)
    for g in range(table.size):
        r, branches = propagate(model, belief, table.tables(g))
        future = sum(pz * _solve(model, table, post, (z,), H, beta, {}) for z, (pz, post) in branches.items())
        out[g] = r + beta * future if H > 0 else 0.0
    return out


def iter_strategies(model: DecModel, H: int) -> Iterator[CoordinationStrategy]:
    nodes = history_nodes(model, H)
    size = PrescriptionTable(model).size
    for combo in product(range(size), repeat=len(nodes)):
        yield CoordinationStrategy(dict(zip(nodes, combo)))


def enumerate_optimal(
    model: DecModel, H: int, beta: float, budget: int = ENUMERATION_BUDGET
) -> tuple[float, CoordinationStrategy]:
    """Brute-force maximum over every coordination strategy (lexicographic ties)."""
    count = strategy_count(model, H)
    if count > budget:
        raise CapacityError(f"{count} strategies exceed the enumeration budget {budget}")
    best_v, best = -math.inf, None
    for strategy in iter_strategies(model, H):
        v = exact_value(model, strategy, H, beta)
        if v > best_v + TIE_TOL:
            best_v, best = v, strategy
    return best_v, best
