import csv
import io

import pytest

from phsplan.domains import get_domain
from phsplan.domains.toys import single_agent_bandit
from phsplan.harness import DigestMismatch, lockstep_verify, run_episode, sweep
from phsplan.planner import PlannerConfig

CFG = PlannerConfig(n_sim=64, particles=100)


@pytest.fixture(scope="module")
def intrusion():
    return get_domain("intrusion")


def csv_text(trace):
    fh = io.StringIO()
    trace.write_csv(fh)
    return fh.getvalue()


def test_episode_trace_shape(intrusion):
    trace = run_episode(intrusion, CFG, 7, 10)
    assert [s.t for s in trace.steps] == list(range(1, 11))
    for s in trace.steps:
        assert len(set(s.prescriptions)) == 1
        assert len(set(s.digests)) == 1
        assert s.root_visits == 64
    rows = list(csv.reader(io.StringIO(csv_text(trace))))
    assert rows[0][:4] == ["t", "state", "gamma_1", "gamma_2"]
    assert len(rows) == 11


def test_discounted_cost_accumulates(intrusion):
    trace = run_episode(intrusion, CFG, 7, 10)
    total = 0.0
    for s in trace.steps:
        total += CFG.beta ** (s.t - 1) * s.cost
        assert s.discounted_cost == total
    assert trace.total_discounted_cost == total


def test_zero_simulations_is_an_error(intrusion):
    with pytest.raises(ValueError):
        run_episode(intrusion, CFG.with_overrides(n_sim=0), 7, 3)


def test_reruns_are_byte_identical(intrusion):
    assert csv_text(run_episode(intrusion, CFG, 11, 6)) == csv_text(run_episode(intrusion, CFG, 11, 6))


def test_perturbed_agent_is_caught_in_process(intrusion):
    with pytest.raises(DigestMismatch) as info:
        run_episode(intrusion, CFG, 3, 5, agent_seeds=[3, 4])
    assert info.value.t == 1


def test_cross_process_matches_in_process(intrusion):
    report = lockstep_verify(intrusion, CFG, [7, 8], 4)
    assert report.passed
    for r in report.results:
        assert r.trace.rows() == run_episode(intrusion, CFG, r.seed, 4).rows()


def test_perturbed_seed_fails_at_first_step(intrusion):
    report = lockstep_verify(intrusion, CFG, [2], 3, perturb={1: 1})
    assert not report.passed
    assert report.results[0].first_mismatch == 1
    assert "FAIL" in report.summary()


def test_single_agent_trivially_passes():
    bandit = single_agent_bandit([0.0, 1.0])
    report = lockstep_verify(bandit, PlannerConfig(beta=0.0, epsilon=0.5, n_sim=10, particles=20), [0, 1], 3)
    assert report.passed
    assert all(s.prescriptions == (1,) for s in report.results[0].trace.steps)


def test_tiny_team_passes_lockstep():
    model = get_domain("filter8")
    report = lockstep_verify(model, PlannerConfig(**model.planner_defaults, n_sim=32, particles=50), [0], 3)
    assert report.passed


def test_model_without_build_spec_is_refused():
    model = get_domain("coord2")
    model.build_spec = None
    with pytest.raises(ValueError):
        lockstep_verify(model, CFG, [0], 2)


def test_lockstep_needs_seeds(intrusion):
    with pytest.raises(ValueError):
        lockstep_verify(intrusion, CFG, [], 3)


def test_sweep_has_one_row_per_cell(intrusion):
    result = sweep(intrusion, CFG, [4, 8], [0, 1, 2], checkpoint=3)
    assert [(r.n_sim, r.seed) for r in result.rows] == [(n, s) for n in (4, 8) for s in (0, 1, 2)]
    summary = result.summary()
    assert [s["n_sim"] for s in summary] == [4, 8]
    fh = io.StringIO()
    result.write_csv(fh)
    assert fh.getvalue().splitlines()[0] == "n_sim,seed,episode,discounted_cost_t3,total_discounted_cost"


def test_sweep_single_point(intrusion):
    result = sweep(intrusion, CFG, [1], [0], checkpoint=2)
    assert len(result.rows) == 1


def test_sweep_rejects_empty_grid(intrusion):
    with pytest.raises(ValueError):
        sweep(intrusion, CFG, [], [0])
    with pytest.raises(ValueError):
        sweep(intrusion, CFG, [4], [0], checkpoint=5, horizon=3)


def test_sweep_cell_equals_standalone_episode(intrusion):
    result = sweep(intrusion, CFG, [16], [5], checkpoint=4, horizon=6)
    trace = run_episode(intrusion, CFG.with_overrides(n_sim=16), 5, 6)
    assert result.rows[0].checkpoint_cost == trace.discounted_cost_at(4)
    assert result.rows[0].total_discounted_cost == trace.total_discounted_cost
