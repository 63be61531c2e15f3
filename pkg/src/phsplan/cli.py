"""Command-line entry point: ``phsplan <command> ...``.

Every command that runs episodes writes plot-ready CSV to ``--out`` (stdout
when omitted). Exit status is 0 on success, 1 when lockstep verification or
model validation fails and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from pathlib import Path
from typing import IO, Iterator

from phsplan import oracle
from phsplan.domains import get_domain, list_domains, load_config
from phsplan.harness import DigestMismatch, lockstep_verify, run_episode, sweep
from phsplan.model import DecModel, validate_model
from phsplan.planner import PlannerConfig, cutoff_depth
from phsplan.prescriptions import (
    CapacityError,
    decode_joint_prescription,
    format_prescription,
    prescription_space_size,
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", default=None, help="registered domain name (default: intrusion)")
    p.add_argument("--config", type=Path, default=None, help="JSON run configuration")


def _add_planner_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-sim", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--particles", type=int, default=None)


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phsplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="play one lockstep episode in-process")
    _add_model_args(p)
    _add_planner_args(p)
    _add_out(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--dump-belief", type=Path, default=None, help="write agent 1's particles after each step")

    p = sub.add_parser("verify-lockstep", help="run agents in separate processes and compare trees")
    _add_model_args(p)
    _add_planner_args(p)
    _add_out(p)
    p.add_argument("--seed", type=int, action="append", default=None, help="repeatable")
    p.add_argument("--seeds", type=_int_list, default=None, help="comma-separated seed list")
    p.add_argument("--horizon", type=int, default=10)

    p = sub.add_parser("sweep", help="episodes over an n_sim grid and a seed list")
    _add_model_args(p)
    _add_planner_args(p)
    _add_out(p)
    p.add_argument("--grid", type=_int_list, default=[16, 64, 256, 1024])
    p.add_argument("--seeds", type=_int_list, default=None, help="comma-separated (default 0..19)")
    p.add_argument("--seed", type=int, default=None, help="first seed of a range of --n-seeds")
    p.add_argument("--n-seeds", type=int, default=20)
    p.add_argument("--checkpoint", type=int, default=5)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--summary", type=Path, default=None, help="per-n_sim mean/SE CSV (default: stderr)")

    p = sub.add_parser("oracle", help="exact optimum of a tiny model")
    _add_model_args(p)
    p.add_argument("--horizon", type=int, default=None, help="default: the planner's cutoff depth")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--enumerate", action="store_true", help="also brute-force every strategy")

    p = sub.add_parser("validate", help="check a model against its contract")
    _add_model_args(p)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("show-prescription", help="decode a flat joint-prescription index")
    _add_model_args(p)
    p.add_argument("index", type=int)

    p = sub.add_parser("domains", help="registered domains")
    p.add_argument("action", choices=["list"])
    return parser


def resolve(args: argparse.Namespace) -> tuple[DecModel, PlannerConfig]:
    """Model and planner config from defaults, then the config file, then flags."""
    doc = load_config(args.config) if args.config else {}
    name = args.domain or doc.get("domain", "intrusion")
    params = doc.get("params") if name == doc.get("domain", name) else None
    model = get_domain(name, params)
    settings = dict(getattr(model, "planner_defaults", {}) or {})
    settings.update(doc.get("planner", {}))
    config = PlannerConfig(**settings)
    config = config.with_overrides(
        n_sim=getattr(args, "n_sim", None),
        beta=getattr(args, "beta", None),
        epsilon=getattr(args, "epsilon", None),
        rho=getattr(args, "rho", None),
        particles=getattr(args, "particles", None),
    )
    return model, config


@contextlib.contextmanager
def _output(path: Path | None, fallback: IO[str]) -> Iterator[IO[str]]:
    if path is None:
        yield fallback
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        yield fh


def cmd_run(args) -> int:
    model, config = resolve(args)
    belief_fh = open(args.dump_belief, "w", newline="") if args.dump_belief else None

    def dump(t, agents):
        belief_fh.write(f"# t={t}\n")
        agents[0].planner.belief.dump_csv(belief_fh)

    try:
        trace = run_episode(model, config, args.seed, args.horizon, on_step=dump if belief_fh else None)
    except DigestMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if belief_fh:
            belief_fh.close()
    with _output(args.out, sys.stdout) as fh:
        trace.write_csv(fh)
    print(f"total discounted cost {trace.total_discounted_cost:.6g}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    model, config = resolve(args)
    seeds = (args.seeds or []) + (args.seed or [])
    if not seeds:
        seeds = [0, 1, 2, 3, 4]
    report = lockstep_verify(model, config, seeds, args.horizon)
    if args.out is not None:
        with _output(args.out, sys.stdout) as fh:
            for i, r in enumerate(report.results):
                if i:
                    fh.write("\n")
                fh.write(f"# seed={r.seed} passed={r.passed}\n")
                r.trace.write_csv(fh)
    print(report.summary())
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    model, config = resolve(args)
    if not args.grid:
        print("error: the n_sim grid is empty", file=sys.stderr)
        return 2
    if args.seeds:
        seeds = args.seeds
    else:
        start = args.seed or 0
        seeds = list(range(start, start + args.n_seeds))

    def progress(n_sim, seed, trace):
        print(f"n_sim={n_sim} seed={seed} cost@t={trace.discounted_cost_at(args.checkpoint):.6g}", file=sys.stderr)

    result = sweep(model, config, args.grid, seeds, args.checkpoint, args.horizon, progress=progress)
    with _output(args.out, sys.stdout) as fh:
        result.write_csv(fh)
    with _output(args.summary, sys.stderr) as fh:
        result.write_summary_csv(fh)
    return 0


def cmd_oracle(args) -> int:
    model, config = resolve(args)
    beta = config.beta
    H = args.horizon if args.horizon is not None else int(cutoff_depth(beta, config.epsilon))
    try:
        count = oracle.strategy_count(model, H)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    v, strategy = oracle.optimal_value(model, H, beta)
    q = oracle.prescription_values(model, H, beta)
    out = {
        "domain": model.name,
        "horizon": H,
        "beta": beta,
        "strategies": count,
        "optimal_value": v,
        "strategy": {",".join(map(str, h)): g for h, g in strategy.assignment.items()},
        "root_values": q.tolist(),
    }
    if args.enumerate:
        v_enum, s_enum = oracle.enumerate_optimal(model, H, beta)
        out["enumerated_value"] = v_enum
        out["routes_agree"] = math.isclose(v, v_enum, abs_tol=1e-9) and s_enum == strategy
    print(json.dumps(out, indent=2))
    return 0


def cmd_validate(args) -> int:
    model, _ = resolve(args)
    problems = validate_model(model, probe_seed=args.seed)
    for msg in problems:
        print(msg)
    print(f"{model.name}: {'ok' if not problems else f'{len(problems)} problem(s)'}")
    return 0 if not problems else 1


def cmd_show(args) -> int:
    model, _ = resolve(args)
    size = prescription_space_size(model)
    if not 0 <= args.index < size:
        print(f"error: index must lie in [0, {size})", file=sys.stderr)
        return 2
    print(format_prescription(decode_joint_prescription(args.index, model), model))
    return 0


def cmd_domains(args) -> int:
    for name, text in list_domains().items():
        print(f"{name:10s} {text}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "verify-lockstep": cmd_verify,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "validate": cmd_validate,
    "show-prescription": cmd_show,
    "domains": cmd_domains,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
