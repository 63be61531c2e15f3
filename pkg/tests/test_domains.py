import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phsplan.correlation import CorrelationDevice
from phsplan.domains import (
    DEFAULT_INTRUSION_JSON,
    IntrusionConfig,
    IntrusionModel,
    build_intrusion_model,
    build_tiny_team,
    get_domain,
    list_domains,
    load_config,
    probe_config,
    rebuild,
)
from phsplan.model import validate_model
from phsplan.prescriptions import prescription_space_size


def bits(*conditions):
    return sum(1 << (c - 1) for c in conditions)


@pytest.fixture(scope="module")
def model():
    return build_intrusion_model()


def test_first_exploit_is_always_ready(model):
    for state in (0, bits(1), bits(3, 5, 9), 2**9 - 1):
        assert model.exploit_ready(state, 0)


def test_joint_precondition(model):
    e4 = 3
    assert not model.exploit_ready(bits(1), e4)
    assert not model.exploit_ready(bits(2, 3), e4)
    assert model.exploit_ready(bits(1, 2), e4)
    assert model.exploit_ready(bits(1, 2, 7), e4)


def test_nothing_with_preconditions_is_ready_at_start(model):
    for j, e in enumerate(model.config.graph.exploits):
        assert model.exploit_ready(0, j) == (not e.pre)


def test_control_partition(model):
    owners = [e.agent + 1 for e in model.config.graph.exploits]
    assert [j + 1 for j, a in enumerate(owners) if a == 1] == [1, 2, 3, 4, 6]
    assert [j + 1 for j, a in enumerate(owners) if a == 2] == [5, 7, 8, 9, 10]


def test_probe_step_unblocked():
    probe = IntrusionModel(probe_config())
    x2, y, _ = probe.step(0, (0, 0), CorrelationDevice(0))
    assert probe.state_conditions(x2) == [1, 2, 3]
    assert y == (1, 1)


def test_probe_step_all_blocked():
    probe = IntrusionModel(probe_config())
    x2, y, _ = probe.step(0, (1, 1), CorrelationDevice(0))
    assert x2 == 0
    assert y == (1, 1)


def test_no_attempts_no_alerts():
    quiet = IntrusionModel(IntrusionConfig().with_uniform_threat(alpha=0.0, false_alarm=0.0))
    for state in (0, bits(1, 2, 3), bits(6, 7)):
        for seed in range(5):
            assert quiet.step(state, (0, 0), CorrelationDevice(seed))[:2] == (state, (0, 0))


def test_probe_trace_over_three_steps():
    probe = IntrusionModel(probe_config())
    rng = CorrelationDevice(0)
    x = 0
    seen = []
    for _ in range(3):
        x, _, _ = probe.step(x, (0, 0), rng)
        seen.append(probe.state_conditions(x))
    assert seen == [[1, 2, 3], [1, 2, 3, 4, 5], [1, 2, 3, 4, 5, 6, 7]]


def test_cost_table(model):
    goal = bits(8, 9)
    assert model.cost(goal, (1, 1)) == 9.0
    assert model.cost(0, (0, 1)) == 1.0
    assert model.cost(0, (1, 0)) == 1.0
    assert model.cost(0, (0, 0)) == 0.0
    assert model.cost(bits(8), (0, 0)) == 0.0
    assert model.cost(goal | bits(1), (0, 0)) == 5.0
    assert model.reward(goal, (1, 1)) == -9.0
    assert model.reward_range == (-9.0, 0.0)


@given(state=st.integers(0, 2**9 - 1), u=st.tuples(st.integers(0, 1), st.integers(0, 1)), seed=st.integers(0, 2**32))
@settings(max_examples=200, deadline=None)
def test_conditions_are_never_lost(state, u, seed):
    model = build_intrusion_model()
    x2, y, _ = model.step(state, u, CorrelationDevice(seed))
    assert x2 & state == state
    assert all(v in (0, 1) for v in y)


def test_full_blocking_never_reaches_the_goal(model):
    for seed in range(20):
        rng = CorrelationDevice(seed)
        x = 0
        for _ in range(30):
            x, _, r = model.step(x, (1, 1), rng)
            assert x == 0
            assert r == -4.0


def test_delayed_sharing_bookkeeping(model):
    rng = CorrelationDevice(3)
    x, mems = model.sample_initial(rng)
    assert mems == (0, 0)
    us, ys, zs = [], [], []
    for t in range(8):
        u = (rng.draw_index(2), rng.draw_index(2))
        x, y, _ = model.step(x, u, rng)
        z, mems = model.innovate(mems, u, y)
        us.append(u)
        ys.append(y)
        zs.append(model.decode_innovation(z))
        assert mems == tuple(2 * a + b for a, b in zip(u, y))
    # after the sentinel, each shared memory is the previous step's (u, y)
    for t in range(1, 8):
        assert zs[t] == tuple(2 * a + b for a, b in zip(us[t - 1], ys[t - 1]))


def test_reachable_states(model):
    reach = model.config.graph.reachable_states()
    assert 0 in reach
    assert any(s & bits(8, 9) == bits(8, 9) for s in reach)
    assert len(reach) == 35


def test_json_default_matches_builtin():
    from_json = build_intrusion_model(DEFAULT_INTRUSION_JSON)
    assert from_json.config == IntrusionConfig()
    doc = load_config(DEFAULT_INTRUSION_JSON)
    assert doc["planner"] == {"beta": 0.8, "epsilon": 0.1, "rho": 10.0, "particles": 400, "n_sim": 256}


def test_bare_topology_document(tmp_path):
    path = tmp_path / "topo.json"
    path.write_text(json.dumps({"alpha": 1.0, "beta": 0.0}))
    doc = load_config(path)
    assert doc["domain"] == "intrusion"
    model = get_domain("intrusion", doc["params"])
    assert all(e.alpha == 1.0 and e.beta == 0.0 for e in model.config.graph.exploits)


@pytest.mark.parametrize(
    "params",
    [
        {"exploits": [{"pre": [], "post": [1], "agent": 3}]},
        {"exploits": [{"pre": [], "agent": 1}]},
        {"action_costs": [0, 1]},
        {"goals": [12]},
    ],
)
def test_malformed_configs_are_rejected(params):
    with pytest.raises(ValueError):
        build_intrusion_model(params)


def test_registry():
    assert set(list_domains()) == {"intrusion", "bandit1", "coord2", "signal2", "filter8"}
    with pytest.raises(ValueError):
        build_tiny_team("nope")
    with pytest.raises(ValueError):
        get_domain("coord2", {"alpha": 1})


@pytest.mark.parametrize("name", ["intrusion", "filter8"])
def test_rebuild_round_trip(name):
    model = get_domain(name)
    again = rebuild(model.build_spec)
    assert again.build_spec == model.build_spec
    assert prescription_space_size(again) == prescription_space_size(model)
    assert validate_model(again) == []


def test_tiny_team_shapes():
    for name in ("bandit1", "coord2", "signal2", "filter8"):
        m = build_tiny_team(name)
        assert m.n_agents == 2 and m.n_states <= 3
        assert all(a == 2 for a in m.n_actions)
        assert all(k <= 2 for k in m.n_memories)
        assert m.n_joint_innovations <= 2
