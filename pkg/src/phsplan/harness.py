"""Lockstep episodes: independent agent planners acting in one environment.

The harness owns the true system: it draws the initial state, runs the
generative step for reality and hands each agent only its private
observation. Agents plan on their own copy of the search tree, act on their
own memory, and publish their innovation; the harness assembles the joint
innovation and broadcasts it. No planner state crosses the boundary.

Cross-process wire format (one UTF-8 line per message)::

    harness -> agent   init <m_i>          initial private memory
                       obs <y_i>           private observation after acting
                       joint <z>           flat joint innovation
                       stop
    agent -> harness   act <g> <u_i> <digest> <root_visits> <root_value_hex>
                       innov <z_i>
"""
from __future__ import annotations

import csv
import math
import multiprocessing as mp
import statistics
from dataclasses import asdict, dataclass, field
from typing import IO, Any, Callable, Iterable, Sequence

from phsplan.correlation import CorrelationDevice
from phsplan.model import DecModel
from phsplan.planner import Planner, PlannerConfig


class DigestMismatch(RuntimeError):
    """Agents disagreed on the prescription or on their search trees."""

    def __init__(self, t: int, prescriptions: Sequence[int], digests: Sequence[str]):
        super().__init__(f"agents diverged at step {t}: prescriptions {list(prescriptions)}")
        self.t = t
        self.prescriptions = tuple(prescriptions)
        self.digests = tuple(digests)


@dataclass(frozen=True)
class StepRecord:
    t: int
    state: int
    prescriptions: tuple[int, ...]
    actions: tuple[int, ...]
    observations: tuple[int, ...]
    innovation: int
    cost: float
    discounted_cost: float
    root_visits: int
    root_value: float
    digests: tuple[str, ...]

    def row(self) -> list[Any]:
        return [
            self.t,
            self.state,
            *self.prescriptions,
            *self.actions,
            *self.observations,
            self.innovation,
            repr(self.cost),
            repr(self.discounted_cost),
            self.root_visits,
            repr(self.root_value),
            *self.digests,
        ]


@dataclass
class EpisodeTrace:
    seed: int
    n_agents: int
    steps: list[StepRecord] = field(default_factory=list)

    def header(self) -> list[str]:
        n = range(1, self.n_agents + 1)
        return [
            "t",
            "state",
            *(f"gamma_{i}" for i in n),
            *(f"u_{i}" for i in n),
            *(f"y_{i}" for i in n),
            "z",
            "cost",
            "discounted_cost",
            "root_visits",
            "root_value",
            *(f"digest_{i}" for i in n),
        ]

    def write_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for s in self.steps:
            w.writerow(s.row())

    def rows(self) -> list[list[Any]]:
        return [s.row() for s in self.steps]

    def discounted_cost_at(self, t: int) -> float:
        for s in self.steps:
            if s.t == t:
                return s.discounted_cost
        raise KeyError(f"trace has no step {t}")

    @property
    def total_discounted_cost(self) -> float:
        return self.steps[-1].discounted_cost if self.steps else 0.0


class AgentRunner:
    """Everything one agent knows: its planner and its private memory."""

    def __init__(self, model: DecModel, config: PlannerConfig, seed: int, agent: int):
        self.model = model
        self.agent = agent
        self.planner = Planner(model, config, seed)
        self.memory: int | None = None
        self._g = self._u = None

    def start(self, memory: int) -> None:
        self.memory = memory

    def act(self) -> tuple[int, int, str, int, float]:
        gamma = self.planner.search()
        g = gamma.flat_index
        u = gamma.per_agent[self.agent](self.memory)
        self._g, self._u = g, u
        stats = self.planner.last_stats
        return g, u, self.planner.tree_digest(), stats.root_visits, stats.root_value

    def local_update(self, y: int) -> int:
        """Observe privately, publish the innovation, keep the new memory."""
        i, m, u = self.agent, self.memory, self._u
        z = self.model.project_z(i, m, u, y)
        self.memory = self.model.project_l(i, m, u, y, z)
        return z

    def common_update(self, z: int) -> None:
        self.planner.observe(self._g, z)


def _world(seed: int) -> CorrelationDevice:
    return CorrelationDevice(seed, ("world",))


def run_episode(
    model: DecModel,
    config: PlannerConfig,
    seed: int,
    horizon: int,
    world_seed: int | None = None,
    agent_seeds: Sequence[int] | None = None,
    on_step: Callable[[int, list[AgentRunner]], None] | None = None,
) -> EpisodeTrace:
    """Play ``horizon`` steps with one in-process planner per agent.

    Raises :class:`DigestMismatch` as soon as two agents pick different
    prescriptions or hold different trees. ``agent_seeds`` overrides the
    shared seed per agent (fault injection). ``on_step(t, agents)`` runs after
    every common update, e.g. to dump beliefs.
    """
    n = model.n_agents
    seeds = list(agent_seeds) if agent_seeds is not None else [seed] * n
    agents = [AgentRunner(model, config, s, i) for i, s in enumerate(seeds)]
    world = _world(seed if world_seed is None else world_seed)
    x, mems = model.sample_initial(world)
    for a, m in zip(agents, mems):
        a.start(m)

    trace = EpisodeTrace(seed, n)
    discounted = 0.0
    for t in range(1, horizon + 1):
        decisions = [a.act() for a in agents]
        gs = tuple(d[0] for d in decisions)
        digests = tuple(d[2] for d in decisions)
        if len(set(gs)) > 1 or len(set(digests)) > 1:
            raise DigestMismatch(t, gs, digests)
        u = tuple(d[1] for d in decisions)
        x2, y, r = model.step(x, u, world)
        zs = [a.local_update(yi) for a, yi in zip(agents, y)]
        z = model.encode_innovation(zs)
        cost = -r
        discounted += config.beta ** (t - 1) * cost
        trace.steps.append(
            StepRecord(t, x, gs, u, tuple(y), z, cost, discounted, decisions[0][3], decisions[0][4], digests)
        )
        x = x2
        if t < horizon:
            for a in agents:
                a.common_update(z)
            if on_step is not None:
                on_step(t, agents)
    return trace


# cross-process lockstep --------------------------------------------------


def _send(conn, line: str) -> None:
    conn.send_bytes((line + "\n").encode())


def _recv(conn) -> list[str]:
    return conn.recv_bytes().decode().rstrip("\n").split(" ")


def _agent_process(conn, spec, config: PlannerConfig, seed: int, agent: int) -> None:
    from phsplan.domains import rebuild

    runner = AgentRunner(rebuild(spec), config, seed, agent)
    try:
        while True:
            msg = _recv(conn)
            verb = msg[0]
            if verb == "init":
                runner.start(int(msg[1]))
                g, u, digest, visits, value = runner.act()
                _send(conn, f"act {g} {u} {digest} {visits} {float(value).hex()}")
            elif verb == "obs":
                _send(conn, f"innov {runner.local_update(int(msg[1]))}")
            elif verb == "joint":
                runner.common_update(int(msg[1]))
                g, u, digest, visits, value = runner.act()
                _send(conn, f"act {g} {u} {digest} {visits} {float(value).hex()}")
            elif verb == "stop":
                break
    finally:
        conn.close()


@dataclass
class SeedResult:
    seed: int
    passed: bool
    first_mismatch: int | None
    trace: EpisodeTrace
    error: str | None = None


@dataclass
class LockstepReport:
    results: list[SeedResult]

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    def summary(self) -> str:
        lines = []
        for r in self.results:
            status = "pass" if r.passed else f"FAIL at step {r.first_mismatch}"
            if r.error:
                status += f" ({r.error})"
            lines.append(f"seed {r.seed}: {status} ({len(r.trace.steps)} steps)")
        lines.append("lockstep: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _lockstep_one(model, config, seed, horizon, perturb, ctx) -> SeedResult:
    n = model.n_agents
    spec = getattr(model, "build_spec", None)
    if spec is None:
        raise ValueError("model has no build_spec; build it with phsplan.domains.get_domain")
    conns, procs = [], []
    for i in range(n):
        parent, child = ctx.Pipe()
        s = seed + perturb.get(i, 0)
        p = ctx.Process(target=_agent_process, args=(child, spec, config, s, i), daemon=True)
        p.start()
        child.close()
        conns.append(parent)
        procs.append(p)

    world = _world(seed)
    trace = EpisodeTrace(seed, n)
    mismatch = None
    error = None
    t = 0
    try:
        x, mems = model.sample_initial(world)
        for c, m in zip(conns, mems):
            _send(c, f"init {m}")
        discounted = 0.0
        for t in range(1, horizon + 1):
            acts = [_recv(c) for c in conns]
            gs = tuple(int(a[1]) for a in acts)
            u = tuple(int(a[2]) for a in acts)
            digests = tuple(a[3] for a in acts)
            if len(set(gs)) > 1 or len(set(digests)) > 1:
                mismatch = t
                break
            x2, y, r = model.step(x, u, world)
            for c, yi in zip(conns, y):
                _send(c, f"obs {yi}")
            zs = [int(_recv(c)[1]) for c in conns]
            z = model.encode_innovation(zs)
            cost = -r
            discounted += config.beta ** (t - 1) * cost
            trace.steps.append(
                StepRecord(
                    t, x, gs, u, tuple(y), z, cost, discounted,
                    int(acts[0][4]), float.fromhex(acts[0][5]), digests,
                )
            )
            x = x2
            if t < horizon:
                for c in conns:
                    _send(c, f"joint {z}")
    except (EOFError, OSError) as exc:
        mismatch, error = max(t, 1), f"agent process died: {exc!r}"
    finally:
        for c in conns:
            try:
                _send(c, "stop")
            except (BrokenPipeError, OSError):
                pass
        for p in procs:
            p.join(timeout=30)
            if p.is_alive():
                p.terminate()
        for c in conns:
            c.close()
    return SeedResult(seed, mismatch is None, mismatch, trace, error)


def lockstep_verify(
    model: DecModel,
    config: PlannerConfig,
    seeds: Iterable[int],
    horizon: int,
    perturb: dict[int, int] | None = None,
) -> LockstepReport:
    """Run each seed with every agent in its own OS process.

    Agents exchange nothing but innovations. The report passes iff every
    step's prescriptions and tree digests match across processes.
    ``perturb`` maps agent index to a seed offset (fault injection).
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    ctx = mp.get_context("spawn")
    return LockstepReport([_lockstep_one(model, config, s, horizon, perturb or {}, ctx) for s in seeds])


# experiment sweep ----------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    n_sim: int
    seed: int
    episode: int
    checkpoint_cost: float
    total_discounted_cost: float


@dataclass
class SweepResult:
    checkpoint: int
    rows: list[SweepRow] = field(default_factory=list)

    def by_n_sim(self) -> dict[int, list[float]]:
        out: dict[int, list[float]] = {}
        for r in self.rows:
            out.setdefault(r.n_sim, []).append(r.checkpoint_cost)
        return out

    def summary(self) -> list[dict[str, float]]:
        """Per ``n_sim``: mean and standard error of the checkpoint cost."""
        out = []
        for n_sim, costs in sorted(self.by_n_sim().items()):
            mean = statistics.fmean(costs)
            sem = statistics.stdev(costs) / math.sqrt(len(costs)) if len(costs) > 1 else float("nan")
            out.append({"n_sim": n_sim, "episodes": len(costs), "mean_cost": mean, "sem": sem})
        return out

    def write_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_sim", "seed", "episode", f"discounted_cost_t{self.checkpoint}", "total_discounted_cost"])
        for r in self.rows:
            w.writerow([r.n_sim, r.seed, r.episode, repr(r.checkpoint_cost), repr(r.total_discounted_cost)])

    def write_summary_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_sim", "episodes", "mean_cost", "sem"])
        for s in self.summary():
            w.writerow([s["n_sim"], s["episodes"], repr(s["mean_cost"]), repr(s["sem"])])


def sweep(
    model: DecModel,
    config: PlannerConfig,
    n_sim_grid: Sequence[int],
    seeds: Sequence[int],
    checkpoint: int = 5,
    horizon: int | None = None,
    progress=None,
) -> SweepResult:
    """Full factorial of ``n_sim`` values and seeds, one episode per cell."""
    if not n_sim_grid:
        raise ValueError("the n_sim grid is empty")
    if not seeds:
        raise ValueError("at least one seed is required")
    horizon = checkpoint if horizon is None else horizon
    if horizon < checkpoint:
        raise ValueError("horizon must reach the checkpoint")
    result = SweepResult(checkpoint)
    for n_sim in n_sim_grid:
        cfg = config.with_overrides(n_sim=int(n_sim))
        for seed in seeds:
            trace = run_episode(model, cfg, seed, horizon)
            result.rows.append(
                SweepRow(int(n_sim), seed, 0, trace.discounted_cost_at(checkpoint), trace.total_discounted_cost)
            )
            if progress is not None:
                progress(n_sim, seed, trace)
    return result


def config_dict(config: PlannerConfig) -> dict[str, Any]:
    return asdict(config)
