"""Collaborative intrusion response on a condition dependency graph.

Conditions are attacker capabilities; an exploit turns its postconditions on
once all its preconditions hold. Each defender blocks every exploit it
controls by playing action 1 (success probability forced to 0) and sees a
single IDS alert. Defense actions and alerts reach the shared database one
step late, so each agent's memory is its last ``(action, alert)`` pair and the
innovation it shares is exactly that memory.

Indices: conditions and exploits are 0-based in code and 1-based in JSON.
A security state is the bitmask of enabled conditions. Memory ``(u, y)`` is
encoded as ``2 * u + y``.

The default topology (only e1 and e4 are fixed by the scenario; the rest is
a chosen example, overridable from JSON):

====  ==============  ==========  =====
exp   pre             post        agent
====  ==============  ==========  =====
e1    -               s1          1
e2    -               s2          1
e3    -               s3          1
e4    s1, s2          s5          1
e5    s3              s4          2
e6    s5              s6          1
e7    s4              s7          2
e8    s6              s8          2
e9    s6, s7          s9          2
e10   s7              s9          2
====  ==============  ==========  =====

Alert 1 (agent 1) detects e1..e3 with 0.8 and e4..e7 with 0.1; alert 2
(agent 2) detects e4..e7 with 0.3 and e8..e10 with 0.8, so e4..e7 can raise
both alerts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Sequence

from phsplan.correlation import CorrelationDevice
from phsplan.model import DecModel


@dataclass(frozen=True)
class Exploit:
    pre: frozenset[int]
    post: frozenset[int]
    agent: int
    alpha: float = 0.5
    beta: float = 0.5
    # (alert index, detection probability) pairs
    detection: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        for p in (self.alpha, self.beta, *(d for _, d in self.detection)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")


@dataclass(frozen=True)
class Alert:
    agent: int
    false_alarm: float = 0.3


def _mask(conds) -> int:
    out = 0
    for c in conds:
        out |= 1 << c
    return out


_DEFAULT_EDGES = [
    # (pre, post, agent) with 1-based condition ids and agents
    ((), (1,), 1),
    ((), (2,), 1),
    ((), (3,), 1),
    ((1, 2), (5,), 1),
    ((3,), (4,), 2),
    ((5,), (6,), 1),
    ((4,), (7,), 2),
    ((6,), (8,), 2),
    ((6, 7), (9,), 2),
    ((7,), (9,), 2),
]


def _default_detection(j: int) -> tuple[tuple[int, float], ...]:
    if j < 3:
        return ((0, 0.8),)
    if j < 7:
        return ((0, 0.1), (1, 0.3))
    return ((1, 0.8),)


def default_exploits(alpha: float = 0.5, beta: float = 0.5) -> tuple[Exploit, ...]:
    return tuple(
        Exploit(
            frozenset(c - 1 for c in pre),
            frozenset(c - 1 for c in post),
            agent - 1,
            alpha,
            beta,
            _default_detection(j),
        )
        for j, (pre, post, agent) in enumerate(_DEFAULT_EDGES)
    )


@dataclass(frozen=True)
class DependencyGraph:
    n_conditions: int
    exploits: tuple[Exploit, ...]
    goals: frozenset[int]

    def __post_init__(self):
        for j, e in enumerate(self.exploits):
            if not (e.pre | e.post) <= frozenset(range(self.n_conditions)):
                raise ValueError(f"exploit {j + 1} references an unknown condition")
        if not self.goals <= frozenset(range(self.n_conditions)):
            raise ValueError("goal conditions must be known conditions")

    def reachable_states(self, start: int = 0) -> list[int]:
        """Security states the attacker can reach from ``start``, sorted."""
        seen = {start}
        frontier = [start]
        while frontier:
            s = frontier.pop()
            for e in self.exploits:
                if _mask(e.pre) & ~s == 0:
                    s2 = s | _mask(e.post)
                    if s2 not in seen:
                        seen.add(s2)
                        frontier.append(s2)
        return sorted(seen)


@dataclass(frozen=True)
class IntrusionConfig:
    graph: DependencyGraph = field(
        default_factory=lambda: DependencyGraph(9, default_exploits(), frozenset({7, 8}))
    )
    alerts: tuple[Alert, ...] = (Alert(0, 0.3), Alert(1, 0.3))
    n_agents: int = 2
    goal_cost: float = 5.0
    # cost of each joint action, indexed by u[0] * 2 + u[1] for two agents
    action_costs: tuple[float, ...] = (0.0, 1.0, 1.0, 4.0)
    initial_state: int = 0

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> IntrusionConfig:
        base = cls()
        n_cond = int(doc.get("conditions", base.graph.n_conditions))
        if "exploits" in doc:
            exploits = []
            for j, e in enumerate(doc["exploits"]):
                try:
                    exploits.append(
                        Exploit(
                            frozenset(int(c) - 1 for c in e.get("pre", [])),
                            frozenset(int(c) - 1 for c in e["post"]),
                            int(e["agent"]) - 1,
                            float(e.get("alpha", 0.5)),
                            float(e.get("beta", 0.5)),
                            tuple(
                                (int(k) - 1, float(p)) for k, p in sorted(e.get("detection", {}).items())
                            ),
                        )
                    )
                except KeyError as exc:
                    raise ValueError(f"exploit {j + 1} is missing {exc}") from None
        else:
            exploits = list(base.graph.exploits)
        goals = frozenset(int(c) - 1 for c in doc.get("goals", [8, 9]))
        graph = DependencyGraph(n_cond, tuple(exploits), goals)
        alerts = tuple(
            Alert(int(a["agent"]) - 1, float(a.get("false_alarm", 0.3)))
            for a in doc.get("alerts", [{"agent": 1}, {"agent": 2}])
        )
        cfg = cls(
            graph=graph,
            alerts=alerts,
            n_agents=int(doc.get("agents", 2)),
            goal_cost=float(doc.get("goal_cost", 5.0)),
            action_costs=tuple(float(c) for c in doc.get("action_costs", base.action_costs)),
            initial_state=_mask(int(c) - 1 for c in doc.get("initial_state", [])),
        )
        if "alpha" in doc or "beta" in doc:
            cfg = cfg.with_uniform_threat(doc.get("alpha"), doc.get("beta"))
        return cfg

    @classmethod
    def from_json(cls, path: str | Path) -> IntrusionConfig:
        doc = json.loads(Path(path).read_text())
        return cls.from_dict(doc.get("params", doc))

    def with_uniform_threat(self, alpha=None, beta=None, detection=None, false_alarm=None) -> IntrusionConfig:
        """Copy with every exploit/alert probability overridden where given."""
        exploits = []
        for e in self.graph.exploits:
            det = e.detection
            if detection is not None:
                det = tuple((k, float(detection)) for k in range(len(self.alerts)))
            exploits.append(
                replace(
                    e,
                    alpha=e.alpha if alpha is None else float(alpha),
                    beta=e.beta if beta is None else float(beta),
                    detection=det,
                )
            )
        alerts = self.alerts
        if false_alarm is not None:
            alerts = tuple(replace(a, false_alarm=float(false_alarm)) for a in alerts)
        return replace(self, graph=replace(self.graph, exploits=tuple(exploits)), alerts=alerts)


class IntrusionModel(DecModel):
    """Generative intrusion-response model with one-step delayed sharing.

    ``step`` draw order: for each ready exploit in index order, an attempt
    draw and, if attempted, a success draw (drawn even when blocked); then for
    each alert in index order, one detection draw per attempted exploit with
    nonzero detection probability for that alert, in exploit order, followed
    by one false-alarm draw. The reward is ``-c(x, u)`` for the state the step
    starts from.
    """

    name = "intrusion"

    def __init__(self, config: IntrusionConfig | None = None):
        cfg = config or IntrusionConfig()
        self.config = cfg
        n = cfg.n_agents
        if n < 1:
            raise ValueError("need at least one agent")
        for j, e in enumerate(cfg.graph.exploits):
            if not 0 <= e.agent < n:
                raise ValueError(f"exploit {j + 1} controlled by unknown agent {e.agent + 1}")
            for k, _ in e.detection:
                if not 0 <= k < len(cfg.alerts):
                    raise ValueError(f"exploit {j + 1} detected by unknown alert {k + 1}")
        for a in cfg.alerts:
            if not 0 <= a.agent < n:
                raise ValueError(f"alert owned by unknown agent {a.agent + 1}")
        if len(cfg.action_costs) != 2**n:
            raise ValueError(f"action_costs needs {2 ** n} entries")

        self.n_agents = n
        self.n_states = 2**cfg.graph.n_conditions
        self.n_actions = (2,) * n
        self.n_observations = (2,) * n
        self.n_memories = (4,) * n
        self.n_innovations = (4,) * n
        self.goal_mask = _mask(cfg.graph.goals)
        worst = (cfg.goal_cost if cfg.graph.goals else 0.0) + max(cfg.action_costs)
        best = min(0.0, min(cfg.action_costs))
        self.reward_range = (-worst, -best)

        g = cfg.graph
        self._pre = tuple(_mask(e.pre) for e in g.exploits)
        self._post = tuple(_mask(e.post) for e in g.exploits)
        self._alpha = tuple(e.alpha for e in g.exploits)
        self._beta = tuple(e.beta for e in g.exploits)
        self._owner = tuple(e.agent for e in g.exploits)
        # per alert: ((exploit, prob), ...) with prob > 0, and the owning agent
        self._detect = tuple(
            tuple((j, p) for j, e in enumerate(g.exploits) for kk, p in e.detection if kk == k and p > 0)
            for k in range(len(cfg.alerts))
        )
        self._alert_owner = tuple(a.agent for a in cfg.alerts)
        self._false = tuple(a.false_alarm for a in cfg.alerts)
        self._ready = lru_cache(maxsize=None)(self._ready_uncached)

    def __repr__(self) -> str:
        return f"IntrusionModel(conditions={self.config.graph.n_conditions}, exploits={len(self._pre)})"

    def _ready_uncached(self, state: int) -> tuple[int, ...]:
        return tuple(j for j, pre in enumerate(self._pre) if pre & ~state == 0)

    def exploit_ready(self, state: int, j: int) -> bool:
        return self._pre[j] & ~state == 0

    def cost(self, state: int, u: Sequence[int]) -> float:
        c = self.config.goal_cost if state & self.goal_mask == self.goal_mask and self.goal_mask else 0.0
        idx = 0
        for a in u:
            idx = 2 * idx + a
        return c + self.config.action_costs[idx]

    def reward(self, x, u):
        return -self.cost(x, u)

    def step(self, x, u, rng: CorrelationDevice):
        draw = rng.draw_uniform
        alpha, beta, post, owner = self._alpha, self._beta, self._post, self._owner
        new = x
        attempted = set()
        for j in self._ready(x):
            if draw() < alpha[j]:
                attempted.add(j)
                if draw() < beta[j] and not u[owner[j]]:
                    new |= post[j]
        y = [0] * self.n_agents
        for k, dets in enumerate(self._detect):
            fired = False
            for j, p in dets:
                if j in attempted and draw() < p:
                    fired = True
            if draw() < self._false[k]:
                fired = True
            if fired:
                y[self._alert_owner[k]] = 1
        return new, tuple(y), -self.cost(x, u)

    def project_z(self, agent, m, u, y):
        return m

    def project_l(self, agent, m, u, y, z):
        return 2 * u + y

    def memory_from_innovation(self, agent, z):
        return z

    def sample_initial(self, rng):
        return self.config.initial_state, (0,) * self.n_agents

    def state_conditions(self, state: int) -> list[int]:
        """1-based ids of the enabled conditions."""
        return [c + 1 for c in range(self.config.graph.n_conditions) if state >> c & 1]


def build_intrusion_model(config: IntrusionConfig | dict | str | Path | None = None) -> IntrusionModel:
    """Intrusion model from a config object, a parameter dict, or a JSON path."""
    if config is None or isinstance(config, IntrusionConfig):
        model = IntrusionModel(config)
    elif isinstance(config, dict):
        model = IntrusionModel(IntrusionConfig.from_dict(config))
    else:
        model = IntrusionModel(IntrusionConfig.from_json(config))
    model.build_spec = ("intrusion", model.config)
    return model


def probe_config() -> IntrusionConfig:
    """Deterministic variant: every attempt happens, succeeds and is detected."""
    return IntrusionConfig().with_uniform_threat(alpha=1.0, beta=1.0, detection=1.0, false_alarm=0.0)
