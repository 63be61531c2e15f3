"""
Two defenders, no messages
==========================

Each defender runs its own planner in its own process. They share a seed and
the innovations broadcast by the environment, nothing else, yet their search
trees hash identically at every step.
"""

import io

from phsplan.domains import get_domain
from phsplan.harness import lockstep_verify, run_episode
from phsplan.planner import PlannerConfig


def main():
    model = get_domain("intrusion")
    cfg = PlannerConfig(n_sim=256)

    # In-process first: both planners live here but never look at each other.
    trace = run_episode(model, cfg, seed=7, horizon=10)
    buf = io.StringIO()
    trace.write_csv(buf)
    for line in buf.getvalue().splitlines()[:4]:
        print(line[:110])
    print(f"discounted cost over 10 steps: {trace.total_discounted_cost:.3f}")

    # Now with one OS process per agent, talking only through pipes.
    report = lockstep_verify(model, cfg, seeds=[7, 8, 9], horizon=10)
    print(report.summary())
    same = report.results[0].trace.rows() == trace.rows()
    print("cross-process trace equals in-process trace:", same)

    # Give agent 2 a different seed and the trees split immediately.
    broken = lockstep_verify(model, cfg, seeds=[7], horizon=3, perturb={1: 1})
    print(broken.summary())


if __name__ == "__main__":
    main()
