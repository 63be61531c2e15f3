"""Decentralized control model under partial history sharing.

Every space is finite and index-encoded. An agent ``i`` holds a local memory
``m`` in ``range(n_memories[i])``; after acting with ``u`` and observing ``y``
it shares the innovation ``z = project_z(i, m, u, y)`` and keeps the memory
``project_l(i, m, u, y, z)``. The joint innovation is the mixed-radix number of
the per-agent innovations with agent 0 most significant.

Subclasses of :class:`DecModel` supply the generative step. Models that also
expose exact probability tables (``transition_distribution`` and
``initial_distribution``) can be solved by :mod:`phsplan.oracle`.
"""
from __future__ import annotations

import math
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from phsplan.correlation import CorrelationDevice

Outcome = tuple[float, int, tuple[int, ...]]
"""``(probability, next_state, observations)``"""


class ContractViolation(ValueError):
    """An index or argument falls outside the model's declared spaces."""


class ExactTablesUnavailable(NotImplementedError):
    """The model only offers a generative step."""


class DecModel:
    """Base class for a finite decentralized control problem.

    Subclasses set the size attributes in ``__init__`` and implement
    :meth:`step`, :meth:`project_z`, :meth:`project_l` and
    :meth:`sample_initial`. Instances are treated as immutable.
    """

    name = "model"
    n_agents: int
    n_states: int
    n_actions: tuple[int, ...]
    n_observations: tuple[int, ...]
    n_memories: tuple[int, ...]
    n_innovations: tuple[int, ...]
    reward_range: tuple[float, float]

    # generative contract -------------------------------------------------

    def step(self, x: int, u: Sequence[int], rng: CorrelationDevice) -> tuple[int, tuple[int, ...], float]:
        """Sample ``(x', y, r)``; all randomness comes from ``rng``."""
        raise NotImplementedError

    def project_z(self, agent: int, m: int, u: int, y: int) -> int:
        raise NotImplementedError

    def project_l(self, agent: int, m: int, u: int, y: int, z: int) -> int:
        raise NotImplementedError

    def sample_initial(self, rng: CorrelationDevice) -> tuple[int, tuple[int, ...]]:
        """Draw ``(x, memories)`` from the initial belief."""
        raise NotImplementedError

    def reward(self, x: int, u: Sequence[int]) -> float:
        """Deterministic reward of taking ``u`` in ``x``, when the model knows it."""
        raise NotImplementedError

    def memory_from_innovation(self, agent: int, z: int) -> int | None:
        """Memory that produced innovation ``z``, if the sharing rule is invertible."""
        return None

    # exact contract (optional) -------------------------------------------

    @property
    def has_exact_tables(self) -> bool:
        return False

    def transition_distribution(self, x: int, u: Sequence[int]) -> list[Outcome]:
        raise ExactTablesUnavailable(f"{self.name} has no exact transition tables")

    def initial_distribution(self) -> dict[tuple[int, tuple[int, ...]], float]:
        raise ExactTablesUnavailable(f"{self.name} has no exact initial distribution")

    # derived sizes --------------------------------------------------------

    @property
    def n_joint_innovations(self) -> int:
        return math.prod(self.n_innovations)

    def encode_innovation(self, zs: Sequence[int]) -> int:
        flat = 0
        for z, size in zip(zs, self.n_innovations):
            flat = flat * size + z
        return flat

    def decode_innovation(self, flat: int) -> tuple[int, ...]:
        out = []
        for size in reversed(self.n_innovations):
            flat, z = divmod(flat, size)
            out.append(z)
        return tuple(reversed(out))

    def innovate(
        self, memories: Sequence[int], u: Sequence[int], y: Sequence[int]
    ) -> tuple[int, tuple[int, ...]]:
        """Joint innovation (flat index) and next memories for one step."""
        pz, pl = self.project_z, self.project_l
        flat = 0
        mems = []
        for i, size in enumerate(self.n_innovations):
            z = pz(i, memories[i], u[i], y[i])
            flat = flat * size + z
            mems.append(pl(i, memories[i], u[i], y[i], z))
        return flat, tuple(mems)


def _check(agent: int, value: int, size: int, what: str) -> None:
    if not 0 <= value < size:
        raise ContractViolation(f"agent {agent}: {what} index {value} outside [0, {size})")


def apply_projection_z(model: DecModel, agent: int, m: int, u: int, y: int) -> int:
    """Range-checked innovation ``z`` for agent ``agent``."""
    if not 0 <= agent < model.n_agents:
        raise ContractViolation(f"no agent {agent}")
    _check(agent, m, model.n_memories[agent], "memory")
    _check(agent, u, model.n_actions[agent], "action")
    _check(agent, y, model.n_observations[agent], "observation")
    z = model.project_z(agent, m, u, y)
    _check(agent, z, model.n_innovations[agent], "innovation")
    return z


def apply_projection_l(model: DecModel, agent: int, m: int, u: int, y: int, z: int) -> int:
    """Range-checked next memory for agent ``agent``."""
    if not 0 <= agent < model.n_agents:
        raise ContractViolation(f"no agent {agent}")
    _check(agent, m, model.n_memories[agent], "memory")
    _check(agent, u, model.n_actions[agent], "action")
    _check(agent, y, model.n_observations[agent], "observation")
    _check(agent, z, model.n_innovations[agent], "innovation")
    m2 = model.project_l(agent, m, u, y, z)
    _check(agent, m2, model.n_memories[agent], "memory")
    return m2


def _sizes_ok(model: DecModel) -> list[str]:
    problems = []
    n = getattr(model, "n_agents", 0)
    if not isinstance(n, int) or n < 1:
        return [f"n_agents must be a positive integer, got {n!r}"]
    if not isinstance(model.n_states, int) or model.n_states < 1:
        problems.append(f"n_states must be >= 1, got {model.n_states!r}")
    for attr in ("n_actions", "n_observations", "n_memories", "n_innovations"):
        sizes = getattr(model, attr)
        if len(sizes) != n:
            problems.append(f"{attr} has {len(sizes)} entries for {n} agents")
            continue
        for i, s in enumerate(sizes):
            if not isinstance(s, int) or s < 1:
                problems.append(f"{attr}[{i}] must be >= 1, got {s!r}")
    lo, hi = model.reward_range
    if not lo <= hi:
        problems.append(f"reward_range {model.reward_range} is empty")
    return problems


def validate_model(model: DecModel, probe_seed: int = 0, n_step_probes: int = 32) -> list[str]:
    """Report every contract violation found by probing the model.

    Checks sizes, probes both projections over every ``(m, u, y)`` tuple of
    every agent (twice, for purity), checks initial samples, rewards over all
    ``(x, u)`` when :meth:`DecModel.reward` is available, and replays a few
    generative steps to confirm they are reproducible from the stream state.
    Returns an empty list for a well-formed model.
    """
    from phsplan.correlation import CorrelationDevice

    problems = _sizes_ok(model)
    if problems:
        return problems

    for i in range(model.n_agents):
        for m in range(model.n_memories[i]):
            for u in range(model.n_actions[i]):
                for y in range(model.n_observations[i]):
                    where = f"agent {i} (m={m}, u={u}, y={y})"
                    z = model.project_z(i, m, u, y)
                    if z != model.project_z(i, m, u, y):
                        problems.append(f"{where}: project_z is not pure")
                    if not (isinstance(z, int) and 0 <= z < model.n_innovations[i]):
                        problems.append(f"{where}: innovation {z!r} outside [0, {model.n_innovations[i]})")
                        continue
                    m2 = model.project_l(i, m, u, y, z)
                    if m2 != model.project_l(i, m, u, y, z):
                        problems.append(f"{where}: project_l is not pure")
                    if not (isinstance(m2, int) and 0 <= m2 < model.n_memories[i]):
                        problems.append(f"{where}: memory {m2!r} outside [0, {model.n_memories[i]})")

    lo, hi = model.reward_range
    try:
        joint = _all_joint_actions(model.n_actions)
        for x in range(model.n_states):
            for u in joint:
                r = model.reward(x, u)
                if not lo <= r <= hi:
                    problems.append(f"reward({x}, {u}) = {r} outside {model.reward_range}")
    except NotImplementedError:
        pass

    rng = CorrelationDevice(probe_seed, ("validate",))
    for k in range(n_step_probes):
        x, mems = model.sample_initial(rng)
        if not 0 <= x < model.n_states:
            problems.append(f"initial state {x} outside [0, {model.n_states})")
            break
        if len(mems) != model.n_agents or any(
            not 0 <= m < s for m, s in zip(mems, model.n_memories)
        ):
            problems.append(f"initial memories {mems} out of range")
            break
        u = tuple(rng.draw_index(a) for a in model.n_actions)
        snap = rng.snapshot()
        first = model.step(x, u, rng)
        again = model.step(x, u, CorrelationDevice.restore(snap))
        if first != again:
            problems.append(f"step({x}, {u}) not reproducible: {first} vs {again}")
        x2, y, r = first
        if not 0 <= x2 < model.n_states:
            problems.append(f"step({x}, {u}) produced state {x2}")
        if len(y) != model.n_agents or any(not 0 <= v < s for v, s in zip(y, model.n_observations)):
            problems.append(f"step({x}, {u}) produced observations {y}")
        if not lo <= r <= hi:
            problems.append(f"step({x}, {u}) reward {r} outside {model.reward_range}")
    return problems


def _all_joint_actions(n_actions: Sequence[int]) -> list[tuple[int, ...]]:
    from itertools import product

    return list(product(*(range(a) for a in n_actions)))
