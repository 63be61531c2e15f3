"""Desk-scale team problems with exact tables.

The named variants in :data:`TINY_TEAM_VARIANTS` are small enough for the
exact oracle. Each carries ``planner_defaults`` (discount, cutoff threshold,
exploration constant) chosen so the search horizon matches the oracle
horizon.
"""
from __future__ import annotations

from typing import Sequence

from phsplan.domains.tabular import TabularModel


def _zero(*_):
    return 0


def _noisy(x: int, p_correct: float) -> list[tuple[float, int]]:
    return [(p_correct, x), (1.0 - p_correct, 1 - x)]


def bandit1() -> TabularModel:
    """One decision, two memoryless agents; reward 1 only for ``u = (0, 1)``."""
    return TabularModel(
        "bandit1",
        n_states=1,
        n_actions=(2, 2),
        n_observations=(1, 1),
        n_memories=(1, 1),
        n_innovations=(1, 1),
        transitions=lambda x, u: [(1.0, 0, (0, 0))],
        reward=lambda x, u: 1.0 if u == (0, 1) else 0.0,
        initial=[(1.0, 0, (0, 0))],
        project_z=_zero,
        project_l=_zero,
        description="1-step team bandit; the prescription (0, 1) pays 1, all others 0",
        planner_defaults={"beta": 0.5, "epsilon": 0.6, "rho": 1.0},
    )


def coord2() -> TabularModel:
    """Two steps; agent 0's noisy reading of a hidden bit is shared publicly.

    Agents score 1 for jointly matching the bit, -1 for disagreeing, else 0.
    """

    def trans(x, u):
        out = []
        for px, x2 in _noisy(x, 0.9):
            for py, y in _noisy(x2, 0.8):
                out.append((px * py, x2, (y, 0)))
        return out

    def reward(x, u):
        if u[0] != u[1]:
            return -1.0
        return 1.0 if u[0] == x else 0.0

    return TabularModel(
        "coord2",
        n_states=2,
        n_actions=(2, 2),
        n_observations=(2, 1),
        n_memories=(1, 1),
        n_innovations=(2, 1),
        transitions=trans,
        reward=reward,
        initial=[(0.5, 0, (0, 0)), (0.5, 1, (0, 0))],
        project_z=lambda i, m, u, y: y if i == 0 else 0,
        project_l=_zero,
        description="2-step coordination on a hidden bit revealed through a shared noisy reading",
        planner_defaults={"beta": 0.5, "epsilon": 0.3, "rho": 2.0},
    )


def signal2() -> TabularModel:
    """Two steps; only agent 0 privately knows the bit, and its action is shared.

    Agent 1 earns 1 for guessing the bit; agent 0 pays 0.25 for action 1.
    Signalling through the shared action is worth its cost.
    """

    def trans(x, u):
        return [(p, x, (y, 0)) for p, y in _noisy(x, 0.9)]

    def reward(x, u):
        return (1.0 if u[1] == x else 0.0) - 0.25 * u[0]

    initial = [(0.5 * p, x, (m, 0)) for x in (0, 1) for p, m in _noisy(x, 0.9)]
    return TabularModel(
        "signal2",
        n_states=2,
        n_actions=(2, 2),
        n_observations=(2, 1),
        n_memories=(2, 1),
        n_innovations=(2, 1),
        transitions=trans,
        reward=reward,
        initial=initial,
        project_z=lambda i, m, u, y: u if i == 0 else 0,
        project_l=lambda i, m, u, y, z: y if i == 0 else 0,
        description="2-step signalling game: private bit, shared action, costly signal",
        planner_defaults={"beta": 0.9, "epsilon": 0.85, "rho": 2.0},
    )


def filter8() -> TabularModel:
    """Hidden bit, two noisy private readings, agent 0's reading shared one step late.

    The joint ``(x, m_0, m_1)`` space has exactly 8 atoms, so the exact filter
    is cheap; it doubles as an oracle instance with 16 joint prescriptions.
    """
    accuracy = (0.75, 0.65)

    def trans(x, u):
        stay = 0.85 if u[0] == u[1] else 0.6
        out = []
        for px, x2 in ((stay, x), (1.0 - stay, 1 - x)):
            for p0, y0 in _noisy(x2, accuracy[0]):
                for p1, y1 in _noisy(x2, accuracy[1]):
                    out.append((px * p0 * p1, x2, (y0, y1)))
        return out

    def reward(x, u):
        return 0.5 * (u[0] == x) + 0.5 * (u[1] == x) - 0.25 * (u[0] != u[1])

    initial = []
    for x in (0, 1):
        for p0, m0 in _noisy(x, accuracy[0]):
            for p1, m1 in _noisy(x, accuracy[1]):
                initial.append((0.5 * p0 * p1, x, (m0, m1)))
    return TabularModel(
        "filter8",
        n_states=2,
        n_actions=(2, 2),
        n_observations=(2, 2),
        n_memories=(2, 2),
        n_innovations=(2, 1),
        transitions=trans,
        reward=reward,
        initial=initial,
        project_z=lambda i, m, u, y: m if i == 0 else 0,
        project_l=lambda i, m, u, y, z: y,
        invert_z=lambda i, z: z if i == 0 else None,
        description="8-atom tracking problem with one-step-delayed sharing of agent 0's reading",
        planner_defaults={"beta": 0.5, "epsilon": 0.3, "rho": 2.0},
    )


TINY_TEAM_VARIANTS = {
    "bandit1": bandit1,
    "coord2": coord2,
    "signal2": signal2,
    "filter8": filter8,
}


def build_tiny_team(variant: str) -> TabularModel:
    try:
        model = TINY_TEAM_VARIANTS[variant]()
    except KeyError:
        raise ValueError(
            f"unknown tiny-team variant {variant!r}; choose from {sorted(TINY_TEAM_VARIANTS)}"
        ) from None
    model.build_spec = (variant, None)
    return model


def single_agent_bandit(rewards: Sequence[float]) -> TabularModel:
    """One agent, one state, one memory: prescription ``k`` is action ``k``."""
    rewards = tuple(float(r) for r in rewards)
    model = TabularModel(
        "bandit",
        n_states=1,
        n_actions=(len(rewards),),
        n_observations=(1,),
        n_memories=(1,),
        n_innovations=(1,),
        transitions=lambda x, u: [(1.0, 0, (0,))],
        reward=lambda x, u: rewards[u[0]],
        initial=[(1.0, 0, (0,))],
        project_z=_zero,
        project_l=_zero,
        planner_defaults={"beta": 0.0, "epsilon": 0.5, "rho": 1.0},
    )
    model.build_spec = ("single-agent-bandit", rewards)
    return model


def constant_reward_chain(reward: float = 1.0, n_actions: int = 2) -> TabularModel:
    """Single agent, single state, fixed reward on every step."""
    return TabularModel(
        "constant",
        n_states=1,
        n_actions=(n_actions,),
        n_observations=(1,),
        n_memories=(1,),
        n_innovations=(1,),
        transitions=lambda x, u: [(1.0, 0, (0,))],
        reward=lambda x, u: reward,
        initial=[(1.0, 0, (0,))],
        project_z=_zero,
        project_l=_zero,
    )


def sharing_toy(kind: str) -> TabularModel:
    """Single-agent toys exercising the sharing rules.

    ``"full"``: the innovation is ``(u, y)`` and memory is empty.
    ``"null"``: nothing is shared and memory is the latest observation.
    ``"window"``: nothing is shared and memory is a 2-slot shift register of
    observations, newest in the low bit.
    """
    if kind == "full":
        pz, pl, nm, nz = (lambda i, m, u, y: 2 * u + y), _zero, 1, 4
    elif kind == "null":
        pz, pl, nm, nz = _zero, (lambda i, m, u, y, z: y), 2, 1
    elif kind == "window":
        pz, pl, nm, nz = _zero, (lambda i, m, u, y, z: ((m << 1) | y) & 0b11), 4, 1
    else:
        raise ValueError(f"unknown sharing toy {kind!r}")

    def trans(x, u):
        return [(0.5, x2, (x2,)) for x2 in (0, 1)]

    return TabularModel(
        f"sharing-{kind}",
        n_states=2,
        n_actions=(2,),
        n_observations=(2,),
        n_memories=(nm,),
        n_innovations=(nz,),
        transitions=trans,
        reward=lambda x, u: float(x == u[0]),
        initial=[(0.5, 0, (0,)), (0.5, 1, (0,))],
        project_z=pz,
        project_l=pl,
    )
