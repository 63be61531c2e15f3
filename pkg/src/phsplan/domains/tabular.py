"""Models given by explicit probability tables.

Such a model offers both contracts: :meth:`TabularModel.step` samples from the
tables with a single categorical draw, and the tables themselves feed the
exact oracle.
"""
from __future__ import annotations

from itertools import product
from typing import Callable, Sequence

from phsplan.correlation import CorrelationDevice
from phsplan.model import DecModel, Outcome

TransitionFn = Callable[[int, tuple[int, ...]], Sequence[Outcome]]
RewardFn = Callable[[int, tuple[int, ...]], float]
ProjZ = Callable[[int, int, int, int], int]
ProjL = Callable[[int, int, int, int, int], int]


class TabularModel(DecModel):
    """Finite model built from transition, reward and initial tables.

    ``transitions(x, u)`` returns ``(p, x', y)`` outcomes; zero-probability
    outcomes are dropped. ``initial`` lists ``(p, x, memories)`` atoms.
    ``step`` consumes exactly one draw. ``sample_initial`` consumes one draw
    unless the initial belief is a point mass, in which case it consumes none.
    """

    def __init__(
        self,
        name: str,
        *,
        n_states: int,
        n_actions: Sequence[int],
        n_observations: Sequence[int],
        n_memories: Sequence[int],
        n_innovations: Sequence[int],
        transitions: TransitionFn,
        reward: RewardFn,
        initial: Sequence[tuple[float, int, Sequence[int]]],
        project_z: ProjZ,
        project_l: ProjL,
        invert_z: Callable[[int, int], int | None] | None = None,
        description: str = "",
        planner_defaults: dict | None = None,
    ):
        self.name = name
        self.description = description
        self.n_agents = len(n_actions)
        self.n_states = n_states
        self.n_actions = tuple(n_actions)
        self.n_observations = tuple(n_observations)
        self.n_memories = tuple(n_memories)
        self.n_innovations = tuple(n_innovations)
        self.planner_defaults = dict(planner_defaults or {})
        self._pz, self._pl, self._invert = project_z, project_l, invert_z

        joint = list(product(*(range(a) for a in self.n_actions)))
        self._rewards = {(x, u): float(reward(x, u)) for x in range(n_states) for u in joint}
        self._trans: dict[tuple[int, tuple[int, ...]], list[Outcome]] = {}
        self._weights: dict[tuple[int, tuple[int, ...]], list[float]] = {}
        for x in range(n_states):
            for u in joint:
                outs = [(float(p), int(x2), tuple(y)) for p, x2, y in transitions(x, u) if p > 0]
                self._trans[(x, u)] = outs
                self._weights[(x, u)] = [o[0] for o in outs]
        self._initial = [(float(p), int(x), tuple(m)) for p, x, m in initial if p > 0]
        self._initial_w = [a[0] for a in self._initial]
        rs = self._rewards.values()
        self.reward_range = (min(rs), max(rs))

    def __repr__(self) -> str:
        return f"TabularModel({self.name!r})"

    def step(self, x, u, rng: CorrelationDevice):
        key = (x, tuple(u))
        outs = self._trans[key]
        _, x2, y = outs[rng.draw_categorical(self._weights[key])]
        return x2, y, self._rewards[key]

    def project_z(self, agent, m, u, y):
        return self._pz(agent, m, u, y)

    def project_l(self, agent, m, u, y, z):
        return self._pl(agent, m, u, y, z)

    def memory_from_innovation(self, agent, z):
        return None if self._invert is None else self._invert(agent, z)

    def sample_initial(self, rng: CorrelationDevice):
        if len(self._initial) == 1:
            _, x, m = self._initial[0]
            return x, m
        _, x, m = self._initial[rng.draw_categorical(self._initial_w)]
        return x, m

    def reward(self, x, u):
        return self._rewards[(x, tuple(u))]

    @property
    def has_exact_tables(self) -> bool:
        return True

    def transition_distribution(self, x, u):
        return list(self._trans[(x, tuple(u))])

    def initial_distribution(self):
        out: dict[tuple[int, tuple[int, ...]], float] = {}
        for p, x, m in self._initial:
            out[(x, m)] = out.get((x, m), 0.0) + p
        return out
