import pytest

from phsplan.correlation import CorrelationDevice
from phsplan.domains import build_intrusion_model, build_tiny_team
from phsplan.domains.tabular import TabularModel
from phsplan.domains.toys import TINY_TEAM_VARIANTS, sharing_toy
from phsplan.model import ContractViolation, apply_projection_l, apply_projection_z, validate_model


def _toy(n_actions=(1,), project_z=lambda i, m, u, y: 0, n_innovations=(1,)):
    k = len(n_actions)
    return TabularModel(
        "probe",
        n_states=1,
        n_actions=n_actions,
        n_observations=(1,) * k,
        n_memories=(1,) * k,
        n_innovations=n_innovations,
        transitions=lambda x, u: [(1.0, 0, (0,) * k)],
        reward=lambda x, u: 0.0,
        initial=[(1.0, 0, (0,) * k)],
        project_z=project_z,
        project_l=lambda i, m, u, y, z: 0,
    )


def test_intrusion_model_validates():
    assert validate_model(build_intrusion_model()) == []


@pytest.mark.parametrize("variant", sorted(TINY_TEAM_VARIANTS))
def test_tiny_teams_validate(variant):
    assert validate_model(build_tiny_team(variant)) == []


def test_out_of_range_innovation_is_reported():
    bad = _toy(project_z=lambda i, m, u, y: 1)
    problems = validate_model(bad)
    assert len(problems) == 1
    assert "outside" in problems[0]


def test_empty_team_is_rejected():
    problems = validate_model(_toy(n_actions=(), n_innovations=()))
    assert problems
    assert any("agent" in p for p in problems)


def test_impure_projection_is_reported():
    calls = []

    def flaky(i, m, u, y):
        calls.append(1)
        return len(calls) % 2

    problems = validate_model(_toy(project_z=flaky, n_innovations=(2,)))
    assert any("pure" in p or "determin" in p for p in problems)


def test_delayed_sharing_publishes_previous_memory():
    model = build_intrusion_model()
    m = 2 * 0 + 1  # (u_prev=0, y=1)
    for u in (0, 1):
        for y in (0, 1):
            assert apply_projection_z(model, 0, m, u, y) == 1


def test_delayed_sharing_memory_keeps_latest_action_and_observation():
    model = build_intrusion_model()
    assert apply_projection_l(model, 0, 1, 1, 0, 1) == 2 * 1 + 0


def test_full_sharing_toy_shares_everything():
    model = sharing_toy("full")
    assert apply_projection_z(model, 0, 0, 1, 0) == 2
    assert model.n_memories == (1,)


def test_null_sharing_toy_shares_nothing():
    model = sharing_toy("null")
    assert {apply_projection_z(model, 0, m, u, y) for m in (0, 1) for u in (0, 1) for y in (0, 1)} == {0}


def test_memoryless_memory_is_constant():
    model = build_tiny_team("bandit1")
    assert apply_projection_l(model, 1, 0, 1, 0, 0) == 0


def test_window_toy_shifts_in_newest_observation():
    model = sharing_toy("window")
    m = 0b01
    m = apply_projection_l(model, 0, m, 0, 0, 0)
    assert m == 0b10
    m = apply_projection_l(model, 0, m, 0, 1, 0)
    assert m == 0b01


def test_projection_rejects_out_of_range_inputs():
    model = build_intrusion_model()
    with pytest.raises(ContractViolation):
        apply_projection_z(model, 0, 4, 0, 0)
    with pytest.raises(ContractViolation):
        apply_projection_l(model, 2, 0, 0, 0, 0)


def test_step_replays_from_snapshot():
    model = build_intrusion_model()
    rng = CorrelationDevice(5)
    x = 0b111
    snap = rng.snapshot()
    first = model.step(x, (0, 1), rng)
    again = model.step(x, (0, 1), CorrelationDevice.restore(snap))
    assert first == again


def test_innovation_encoding_agent_zero_most_significant():
    model = build_intrusion_model()
    assert model.encode_innovation((1, 2)) == 1 * 4 + 2
    assert model.decode_innovation(6) == (1, 2)
    assert model.n_joint_innovations == 16
