"""Monte-Carlo tree search over virtual histories.

The tree alternates history nodes and joint prescriptions. A history node
(:class:`TreeNode`) stores its visit count ``N(h)`` and, for every joint
prescription ``g``, the pair ``(N(hg), V(hg))`` in flat arrays indexed by the
prescription number. Children of ``hg`` are keyed by ``(g, z)`` where ``z`` is
the flat joint innovation.

Bookkeeping, as implemented:

* A node is created when a simulation first reaches it. Creation initializes
  every ``(N(hg), V(hg))`` to ``(n0, v0)`` and that first visit ends in a
  rollout, which does not touch ``N(h)``.
* On later visits ``N(h)`` is incremented before descending and
  ``N(hg), V(hg)`` after, so ``N(h) == sum_g (N(hg) - n0)`` at every node.
* :meth:`Planner.search` creates the root before its first simulation, so
  every simulation passes through UCB selection at the root and
  ``N(root)`` grows by exactly one per simulation.
* Nodes at or beyond the cutoff depth are never created.

Draw accounting on the search stream, per simulation: one draw (or the
initial sampler's draws, at the empty history) for the root particle, then per
simulated step the model's step draws, plus one draw per rollout step for the
rollout prescription.
"""
from __future__ import annotations

import hashlib
import math
import struct
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from phsplan.belief import (
    Belief,
    ParticleDepletion,
    init_belief,
    revive_belief,
    update_belief,
)
from phsplan.correlation import CorrelationDevice
from phsplan.model import DecModel
from phsplan.prescriptions import (
    JointPrescription,
    PrescriptionTable,
    decode_joint_prescription,
)

EMPTY_TREE_DIGEST = hashlib.sha256(b"phsplan:empty-tree").hexdigest()


@dataclass(frozen=True)
class PlannerConfig:
    beta: float = 0.8
    epsilon: float = 0.1
    rho: float = 10.0
    particles: int = 400
    n_sim: int = 256
    n0: int = 0
    v0: float = 0.0
    max_attempts_factor: int = 50
    # wall-clock budget in seconds; replaces n_sim when set (not reproducible)
    time_budget: float | None = None
    # rollout distribution over joint prescriptions; None means uniform
    rollout_weights: tuple[float, ...] | None = None
    record_returns: bool = False

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.particles < 1:
            raise ValueError("particles must be at least 1")
        if self.n_sim < 0:
            raise ValueError("n_sim must be nonnegative")

    def with_overrides(self, **kw) -> PlannerConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def cutoff_depth(beta: float, epsilon: float) -> float:
    """Smallest ``d >= 0`` with ``beta**d < epsilon``; ``math.inf`` if none exists."""
    if not 0.0 <= beta <= 1.0 or not epsilon > 0:
        raise ValueError("need 0 <= beta <= 1 and epsilon > 0")
    if beta == 1.0:
        return 0 if 1.0 < epsilon else math.inf
    d = 0
    while beta**d >= epsilon:
        d += 1
    return d


class TreeNode:
    """History node with per-prescription statistics."""

    __slots__ = ("n", "counts", "values", "children", "_first_untried")

    def __init__(self, size: int, n0: int = 0, v0: float = 0.0):
        self.n = 0
        self.counts = np.full(size, n0, dtype=np.int64)
        self.values = np.full(size, v0, dtype=np.float64)
        self.children: dict[tuple[int, int], TreeNode] = {}
        self._first_untried = 0

    def __repr__(self) -> str:
        return f"TreeNode(N={self.n}, children={len(self.children)})"

    @property
    def value(self) -> float:
        """Visit-weighted mean of the prescription values, ``V(h)``."""
        total = int(self.counts.sum())
        if total == 0:
            return 0.0
        return float(np.dot(self.counts, self.values) / total)

    def prescription(self, g: int) -> PrescriptionNode:
        kids = {z: c for (gg, z), c in self.children.items() if gg == g}
        return PrescriptionNode(int(self.counts[g]), float(self.values[g]), kids)


class PrescriptionNode(NamedTuple):
    """Read-only view of ``hg``: its count, value and children by innovation."""

    n: int
    v: float
    children: dict[int, TreeNode]


def ucb1_select(node: TreeNode, rho: float) -> int:
    """UCB1 choice; untried prescriptions score +inf, ties go to the lowest index."""
    counts = node.counts
    size = len(counts)
    # untried prescriptions are always taken lowest-first, so they form a suffix
    k = node._first_untried
    while k < size and counts[k] != 0:
        k += 1
    node._first_untried = k
    if k < size:
        return k
    if rho == 0.0:
        return int(np.argmax(node.values))
    log_n = math.log(node.n) if node.n > 0 else 0.0
    scores = node.values + rho * np.sqrt(log_n / counts)
    return int(np.argmax(scores))


def _ucb_reference(values: Sequence[float], counts: Sequence[int], n: int, rho: float) -> int:
    # plain-Python restatement, used by the tests as a cross-check
    best, best_score = 0, -math.inf
    for g, (v, c) in enumerate(zip(values, counts)):
        score = math.inf if c == 0 else v + rho * math.sqrt(math.log(n) / c)
        if score > best_score:
            best, best_score = g, score
    return best


class SearchStats(NamedTuple):
    prescription: int
    root_visits: int
    root_value: float
    prescription_value: float
    simulations: int


@dataclass
class Planner:
    """One agent's planner. Agents sharing ``seed`` build identical trees."""

    model: DecModel
    config: PlannerConfig
    seed: int
    path: tuple[str, ...] = ()
    root: TreeNode | None = field(default=None, init=False)
    belief: Belief | None = field(default=None, init=False)
    history: list[tuple[int, int]] = field(default_factory=list, init=False)
    depletions: int = field(default=0, init=False)
    last_stats: SearchStats | None = field(default=None, init=False)

    def __post_init__(self):
        self.table = PrescriptionTable(self.model)
        self.size = self.table.size
        self.cutoff = cutoff_depth(self.config.beta, self.config.epsilon)
        if self.cutoff == math.inf:
            raise ValueError("beta = 1 with epsilon <= 1 never reaches the cutoff")
        device = CorrelationDevice(self.seed, self.path)
        self.search_rng = device.substream("search")
        self.belief_rng = device.substream("belief")
        w = self.config.rollout_weights
        if w is not None and len(w) != self.size:
            raise ValueError(f"rollout_weights needs {self.size} entries")
        self.returns: dict[tuple[int, int], list[float]] = {}

    # tree ---------------------------------------------------------------

    def _new_node(self) -> TreeNode:
        return TreeNode(self.size, self.config.n0, self.config.v0)

    def _draw_rollout_prescription(self) -> int:
        w = self.config.rollout_weights
        if w is None:
            return self.search_rng.draw_index(self.size)
        return self.search_rng.draw_categorical(w)

    def rollout(self, x: int, mems: tuple[int, ...], depth: int) -> float:
        """Discounted return under the rollout distribution; never touches the tree."""
        model, rng, actions = self.model, self.search_rng, self.table.actions
        rewards = []
        while depth < self.cutoff:
            g = self._draw_rollout_prescription()
            u = actions(g, mems)
            x, y, r = model.step(x, u, rng)
            _, mems = model.innovate(mems, u, y)
            rewards.append(r)
            depth += 1
        ret = 0.0
        beta = self.config.beta
        for r in reversed(rewards):
            ret = r + beta * ret
        return ret

    def simulate(self, x: int, mems: tuple[int, ...], node: TreeNode, depth: int) -> float:
        """One simulation from an existing node; returns the discounted return."""
        if depth >= self.cutoff:
            return 0.0
        g = ucb1_select(node, self.config.rho)
        u = self.table.actions(g, mems)
        x2, y, r = self.model.step(x, u, self.search_rng)
        z, mems2 = self.model.innovate(mems, u, y)
        node.n += 1
        if depth + 1 >= self.cutoff:
            future = 0.0
        else:
            child = node.children.get((g, z))
            if child is None:
                node.children[(g, z)] = self._new_node()
                future = self.rollout(x2, mems2, depth + 1)
            else:
                future = self.simulate(x2, mems2, child, depth + 1)
        ret = r + self.config.beta * future
        n = node.counts[g] + 1
        node.counts[g] = n
        node.values[g] += (ret - node.values[g]) / n
        if self.config.record_returns:
            self.returns.setdefault((id(node), g), []).append(ret)
        return ret

    def _root_particle(self) -> tuple[int, tuple[int, ...]]:
        if not self.history:
            x, mems = self.model.sample_initial(self.search_rng)
            return x, tuple(mems)
        return self.belief.sample(self.search_rng)

    def search(self, n_sim: int | None = None) -> JointPrescription:
        """Run the simulations and return the best visited root prescription."""
        n_sim = self.config.n_sim if n_sim is None else n_sim
        budget = self.config.time_budget
        if budget is None and n_sim < 1:
            raise ValueError("search needs at least one simulation (root never expanded)")
        if self.cutoff == 0:
            raise ValueError("cutoff depth is 0: nothing to plan")
        if self.root is None:
            self.root = self._new_node()
        root = self.root
        done = 0
        if budget is None:
            for _ in range(n_sim):
                x, mems = self._root_particle()
                self.simulate(x, mems, root, 0)
            done = n_sim
        else:
            stop = time.perf_counter() + budget
            while time.perf_counter() < stop or done == 0:
                x, mems = self._root_particle()
                self.simulate(x, mems, root, 0)
                done += 1
        g = self.best_prescription()
        self.last_stats = SearchStats(g, root.n, root.value, float(root.values[g]), done)
        return decode_joint_prescription(g, self.model)

    def best_prescription(self) -> int:
        """Argmax of ``V(hg)`` over visited root prescriptions, lowest index on ties."""
        root = self.root
        if root is None:
            raise ValueError("root was never expanded")
        visited = root.counts > self.config.n0
        if not visited.any():
            raise ValueError("root was never expanded")
        masked = np.where(visited, root.values, -np.inf)
        return int(np.argmax(masked))

    def advance_root(self, g: int, z: int) -> TreeNode:
        """Re-root at ``(g, z)``, keeping that subtree and dropping its siblings."""
        child = None if self.root is None else self.root.children.get((g, z))
        self.root = child if child is not None else self._new_node()
        self.history.append((g, z))
        return self.root

    # belief ---------------------------------------------------------------

    def _prior_belief(self) -> Belief:
        if self.belief is None:
            self.belief = init_belief(self.model, self.config.particles, self.belief_rng)
        return self.belief

    def update_belief(self, g: int, z: int) -> Belief:
        """Posterior particles after ``g`` was executed and ``z`` shared.

        On depletion the prior is revived and the update retried once; if that
        also fails the revived particles are kept as the posterior.
        """
        prior = self._prior_belief()
        K = self.config.particles
        tables = self.table.tables(g)
        max_attempts = self.config.max_attempts_factor * K
        try:
            post = update_belief(prior, tables, z, self.model, self.belief_rng, K, max_attempts)
        except ParticleDepletion:
            self.depletions += 1
            revived = revive_belief(prior, z, self.model, self.belief_rng, K)
            try:
                post = update_belief(revived, tables, z, self.model, self.belief_rng, K, max_attempts)
            except ParticleDepletion:
                post = revived
        self.belief = post
        return post

    def observe(self, g: int, z: int) -> None:
        """Advance the virtual history by ``(g, z)``: tree first, then belief."""
        self.update_belief(g, z)
        self.advance_root(g, z)

    # digest ---------------------------------------------------------------

    def tree_digest(self) -> str:
        return tree_digest(self.root)


def tree_digest(root: TreeNode | None) -> str:
    """SHA-256 of the tree in depth-first order.

    Each node contributes ``N(h)``, its count array (int64 LE), its value array
    (float64 LE bit patterns) and its child count; children follow sorted by
    ``(g, z)``. An absent tree hashes to :data:`EMPTY_TREE_DIGEST`.
    """
    if root is None:
        return EMPTY_TREE_DIGEST
    h = hashlib.sha256()
    stack = [root]
    while stack:
        node = stack.pop()
        h.update(struct.pack("<qq", node.n, len(node.children)))
        h.update(node.counts.astype("<i8").tobytes())
        h.update(node.values.astype("<f8").tobytes())
        keys = sorted(node.children)
        for g, z in keys:
            h.update(struct.pack("<qq", g, z))
        stack.extend(node.children[k] for k in reversed(keys))
    return h.hexdigest()


def count_nodes(root: TreeNode | None) -> int:
    if root is None:
        return 0
    total, stack = 0, [root]
    while stack:
        node = stack.pop()
        total += 1
        stack.extend(node.children.values())
    return total
