"""Particle approximation of the common-information belief.

A particle is one joint atom ``(x, m_1, ..., m_n)``. The belief after a
virtual history is the empirical distribution of ``K`` particles, refreshed by
rejection sampling against the innovation that was actually shared.

Draw accounting (all on the stream passed in):

* ``init_belief``: whatever ``model.sample_initial`` consumes, ``K`` times.
* ``update_belief``: per attempt, one draw to pick a particle plus the draws of
  ``model.step``.
* ``revive_belief``: per particle, ``model.sample_initial`` plus one draw per
  agent whose sharing rule is not invertible.
"""
from __future__ import annotations

import csv
import hashlib
from collections import Counter
from typing import IO, NamedTuple, Sequence

from phsplan.correlation import CorrelationDevice
from phsplan.model import DecModel
from phsplan.prescriptions import JointPrescription


class ParticleDepletion(RuntimeError):
    """Too few particles reproduced the observed joint innovation."""

    def __init__(self, accepted: int, attempts: int, z_true: int):
        super().__init__(
            f"accepted {accepted} particles in {attempts} attempts for innovation {z_true}"
        )
        self.accepted = accepted
        self.attempts = attempts
        self.z_true = z_true


class Particle(NamedTuple):
    x: int
    memories: tuple[int, ...]


class Belief:
    """Multiset of particles, kept in insertion order."""

    __slots__ = ("particles", "attempts")

    def __init__(self, particles: Sequence[Particle], attempts: int = 0):
        self.particles = list(particles)
        # rejection-sampling attempts spent producing this belief (0 if not an update)
        self.attempts = attempts

    def __len__(self) -> int:
        return len(self.particles)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Belief):
            return NotImplemented
        return self.canonical() == other.canonical()

    def sample(self, rng: CorrelationDevice) -> Particle:
        return self.particles[rng.draw_index(len(self.particles))]

    def canonical(self) -> list[Particle]:
        return sorted(self.particles)

    def counts(self) -> Counter:
        return Counter(self.particles)

    def distribution(self) -> dict[tuple[int, tuple[int, ...]], float]:
        k = len(self.particles)
        return {(p.x, p.memories): c / k for p, c in sorted(self.counts().items())}

    def digest(self) -> str:
        h = hashlib.sha256()
        for p in self.canonical():
            h.update(repr((p.x, p.memories)).encode())
        return h.hexdigest()

    def dump_csv(self, fh: IO[str]) -> None:
        """Write ``x, m1..mn, count`` rows in canonical order."""
        n = len(self.particles[0].memories) if self.particles else 0
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", *(f"m{i + 1}" for i in range(n)), "count"])
        for p, c in sorted(self.counts().items()):
            w.writerow([p.x, *p.memories, c])


def init_belief(model: DecModel, K: int, rng: CorrelationDevice) -> Belief:
    if K < 1:
        raise ValueError("K must be at least 1")
    out = []
    for _ in range(K):
        x, mems = model.sample_initial(rng)
        out.append(Particle(x, tuple(mems)))
    return Belief(out)


def update_belief(
    belief: Belief,
    gamma: JointPrescription | Sequence[Sequence[int]],
    z_true: int,
    model: DecModel,
    rng: CorrelationDevice,
    K: int | None = None,
    max_attempts: int | None = None,
) -> Belief:
    """Rejection-sample ``K`` successor particles consistent with ``z_true``.

    Each attempt draws a particle, acts with ``gamma``, steps the model and
    keeps ``(x', m')`` only if the simulated joint innovation equals
    ``z_true``. Raises :class:`ParticleDepletion` when ``max_attempts``
    (default ``50 * K``) run out first.
    """
    K = len(belief) if K is None else K
    max_attempts = 50 * K if max_attempts is None else max_attempts
    if max_attempts < K:
        raise ValueError("max_attempts must be at least K")
    if not belief.particles:
        raise ValueError("cannot update an empty belief")
    tables = gamma.tables() if isinstance(gamma, JointPrescription) else tuple(map(tuple, gamma))

    particles = belief.particles
    n_part = len(particles)
    step, innovate, draw = model.step, model.innovate, rng.draw_index
    accepted: list[Particle] = []
    attempts = 0
    while len(accepted) < K:
        if attempts >= max_attempts:
            raise ParticleDepletion(len(accepted), attempts, z_true)
        attempts += 1
        x, mems = particles[draw(n_part)]
        u = tuple(t[m] for t, m in zip(tables, mems))
        x2, y, _ = step(x, u, rng)
        z, mems2 = innovate(mems, u, y)
        if z == z_true:
            accepted.append(Particle(x2, mems2))
    return Belief(accepted, attempts)


def revive_belief(
    belief: Belief | None,
    z_true: int,
    model: DecModel,
    rng: CorrelationDevice,
    K: int,
) -> Belief:
    """Fresh particles after depletion.

    States come from the initial-belief sampler. Each agent's memory is
    replaced by the unique memory that emits its component of ``z_true`` when
    the model can invert its sharing rule, and drawn uniformly otherwise. The
    result stands in for the depleted prior, so re-running
    :func:`update_belief` with the same ``z_true`` is expected to succeed.
    """
    zs = model.decode_innovation(z_true)
    fixed = [model.memory_from_innovation(i, z) for i, z in enumerate(zs)]
    out = []
    for _ in range(K):
        x, _ = model.sample_initial(rng)
        mems = tuple(
            f if f is not None else rng.draw_index(model.n_memories[i])
            for i, f in enumerate(fixed)
        )
        out.append(Particle(x, mems))
    return Belief(out)
