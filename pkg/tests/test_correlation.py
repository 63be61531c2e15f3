import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phsplan.correlation import BLOCK, CorrelationDevice


def draws(dev, n):
    return [dev.draw_uniform() for _ in range(n)]


def test_same_seed_same_stream():
    assert draws(CorrelationDevice(5), 50) == draws(CorrelationDevice(5), 50)


def test_same_label_twice_gives_same_child():
    d = CorrelationDevice(9)
    assert draws(d.substream("search"), 100) == draws(d.substream("search"), 100)


def test_distinct_labels_diverge():
    d = CorrelationDevice(9)
    a = draws(d.substream("a"), 10_000)
    b = draws(d.substream("b"), 10_000)
    assert any(x != y for x, y in zip(a, b))


def test_nested_substreams_equal_path():
    d = CorrelationDevice(3)
    nested = d.substream("x").substream("y")
    direct = CorrelationDevice(3, ["x", "y"])
    assert draws(nested, 20) == draws(direct, 20)


def test_substream_does_not_consume_parent_draws():
    d = CorrelationDevice(3)
    d.substream("x")
    assert d.counter == 0


def test_counter_advances_by_one_per_draw():
    d = CorrelationDevice(1)
    d.draw_uniform()
    d.draw_index(7)
    d.draw_categorical([0.2, 0.8])
    assert d.counter == 3


def test_mean_of_a_million_draws():
    d = CorrelationDevice(2024)
    mean = sum(d.draw_uniform() for _ in range(1_000_000)) / 1_000_000
    assert abs(mean - 0.5) < 0.002


def test_stream_crosses_block_boundary_contiguously():
    d = CorrelationDevice(11, ["p"])
    xs = draws(d, 3 * BLOCK + 5)
    key = np.frombuffer(CorrelationDevice(11, ["p"])._key, dtype="<u8").copy()
    ref = np.random.Generator(np.random.Philox(key=key)).random(3 * BLOCK + 5).tolist()
    assert xs == ref


def test_categorical_degenerate():
    d = CorrelationDevice(0)
    assert {d.draw_categorical([1, 0, 0]) for _ in range(200)} == {0}


def test_categorical_fair_coin():
    d = CorrelationDevice(77)
    zeros = sum(d.draw_categorical([1, 1]) == 0 for _ in range(100_000))
    assert 0.49 <= zeros / 100_000 <= 0.51


@pytest.mark.parametrize("weights", [[0, 0], [], [1, -1]])
def test_categorical_rejects_bad_weights(weights):
    with pytest.raises(ValueError):
        CorrelationDevice(0).draw_categorical(weights)


def test_categorical_skips_zero_weight_entries():
    d = CorrelationDevice(4)
    picks = {d.draw_categorical([0, 1, 0, 1, 0]) for _ in range(500)}
    assert picks == {1, 3}


def test_draw_index_rejects_empty_range():
    with pytest.raises(ValueError):
        CorrelationDevice(0).draw_index(0)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_range(seed):
    with pytest.raises(ValueError):
        CorrelationDevice(seed)


@given(seed=st.integers(0, 2**64 - 1), burn=st.integers(0, 3 * BLOCK))
@settings(max_examples=40, deadline=None)
def test_snapshot_restore_continues_identically(seed, burn):
    d = CorrelationDevice(seed, ["belief"])
    draws(d, burn)
    snap = d.snapshot()
    assert len(snap) == 48
    restored = CorrelationDevice.restore(snap)
    assert restored.counter == burn
    assert draws(restored, 50) == draws(d, 50)


def test_restored_device_derives_same_substreams():
    d = CorrelationDevice(8)
    r = CorrelationDevice.restore(d.snapshot())
    assert draws(r.substream("k"), 10) == draws(d.substream("k"), 10)


def test_restore_rejects_bad_length():
    with pytest.raises(ValueError):
        CorrelationDevice.restore("abc")


def test_snapshot_replays_in_another_process():
    d = CorrelationDevice(123, ["search"])
    draws(d, 1500)
    snap = d.snapshot()
    code = (
        "from phsplan.correlation import CorrelationDevice as C;"
        f"d = C.restore('{snap}');"
        "print(','.join(float.hex(d.draw_uniform()) for _ in range(20)))"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
    assert out.strip() == ",".join(float.hex(x) for x in draws(d, 20))


@given(seed=st.integers(0, 2**64 - 1))
@settings(max_examples=50, deadline=None)
def test_outputs_in_unit_interval(seed):
    d = CorrelationDevice(seed)
    assert all(0.0 <= x < 1.0 for x in draws(d, 64))
    assert all(0 <= d.draw_index(3) < 3 for _ in range(64))
