"""Shared randomness for agents that must not communicate.

Every agent builds a :class:`CorrelationDevice` from the same seed. Outputs are
a pure function of ``(seed, path, counter)``: the path selects a sub-stream and
the counter is the number of uniforms already drawn from it. Two agents that
perform the same logical operations therefore see the same numbers, which is
what lets them grow identical search trees.

The bits come from numpy's Philox4x64 counter-based generator keyed by a
BLAKE2b digest of the seed and path. Uniforms are produced in blocks of
``BLOCK`` values; block ``b`` is generated from Philox counter ``b * BLOCK / 4``
so the concatenated blocks form one contiguous Philox stream.

Draw accounting
---------------
* :meth:`CorrelationDevice.draw_uniform` consumes one draw.
* :meth:`CorrelationDevice.draw_index` consumes one draw.
* :meth:`CorrelationDevice.draw_categorical` consumes one draw.
* :meth:`CorrelationDevice.substream` consumes none.
"""
from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

BLOCK = 1024
_MASK64 = (1 << 64) - 1


def _derive_key(parent: bytes, label: str) -> bytes:
    h = hashlib.blake2b(digest_size=16, person=b"phsplan-stream")
    h.update(parent)
    h.update(len(label).to_bytes(4, "little"))
    h.update(label.encode("utf-8"))
    return h.digest()


def _root_key(seed: int) -> bytes:
    h = hashlib.blake2b(digest_size=16, person=b"phsplan-seed")
    h.update((seed & _MASK64).to_bytes(8, "little"))
    return h.digest()


class CorrelationDevice:
    """Deterministic, counter-based uniform stream.

    A device is single-owner. Give each consumer (thread, process, purpose)
    its own :meth:`substream` instead of sharing one instance.
    """

    __slots__ = ("seed", "path", "_key", "_counter", "_buf")

    def __init__(self, seed: int, path: Sequence[str] = ()):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.path = tuple(path)
        key = _root_key(self.seed)
        for label in self.path:
            key = _derive_key(key, label)
        self._key = key
        self._counter = 0
        self._buf: list[float] = []

    def __repr__(self) -> str:
        return f"CorrelationDevice(seed={self.seed}, path={list(self.path)}, counter={self._counter})"

    @property
    def counter(self) -> int:
        """Number of uniforms drawn so far."""
        return self._counter

    def substream(self, label: str) -> CorrelationDevice:
        """Child stream keyed by ``(seed, path + [label])``, starting at counter 0."""
        child = CorrelationDevice.__new__(CorrelationDevice)
        child.seed = self.seed
        child.path = self.path + (str(label),)
        child._key = _derive_key(self._key, str(label))
        child._counter = 0
        child._buf = []
        return child

    def _fill(self, block: int) -> None:
        key = np.frombuffer(self._key, dtype="<u8").copy()
        bitgen = np.random.Philox(key=key, counter=block * (BLOCK // 4))
        self._buf = np.random.Generator(bitgen).random(BLOCK).tolist()

    def draw_uniform(self) -> float:
        """One uniform in [0, 1)."""
        pos = self._counter % BLOCK
        if pos == 0:
            self._fill(self._counter // BLOCK)
        self._counter += 1
        return self._buf[pos]

    def draw_index(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` from a single uniform draw."""
        if n <= 0:
            raise ValueError("n must be positive")
        k = int(self.draw_uniform() * n)
        return k if k < n else n - 1

    def draw_categorical(self, weights: Sequence[float]) -> int:
        """Index ``i`` with probability ``weights[i] / sum(weights)``.

        Uses a left-to-right running sum so every agent resolves the draw
        identically.
        """
        total = 0.0
        for w in weights:
            if w < 0:
                raise ValueError("weights must be nonnegative")
            total += w
        if not total > 0:
            raise ValueError("weights must have a positive sum")
        target = self.draw_uniform() * total
        acc = 0.0
        last = 0
        for i, w in enumerate(weights):
            if w > 0:
                acc += w
                last = i
                if target < acc:
                    return i
        return last

    def snapshot(self) -> str:
        """Hex string capturing the stream key and counter."""
        return self._key.hex() + f"{self._counter:016x}"

    @classmethod
    def restore(cls, snapshot: str) -> CorrelationDevice:
        """Rebuild a device from :meth:`snapshot`; the continuation is identical.

        Seed and path metadata are not stored (``seed`` is 0, ``path`` is
        empty); substreams derived from the restored device still match those
        of the original because they are keyed off the stream key.
        """
        if len(snapshot) != 48:
            raise ValueError("snapshot must be 48 hex characters")
        dev = cls.__new__(cls)
        dev.seed = 0
        dev.path = ()
        dev._key = bytes.fromhex(snapshot[:32])
        dev._counter = int(snapshot[32:], 16)
        dev._buf = []
        if dev._counter % BLOCK:
            dev._fill(dev._counter // BLOCK)
        return dev

