"""Joint prescriptions: the coordinator's action space.

A prescription for agent ``i`` is a table with one action per local memory.
Joint prescriptions are numbered by a mixed-radix scheme: agent 0's table is
most significant and, inside a table, memory 0 is the most significant digit
(base ``n_actions[i]``). Every agent uses this ordering, so "lowest index"
tie-breaking means the same thing everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from phsplan.model import ContractViolation, DecModel

CAPACITY = 2**63


class CapacityError(OverflowError):
    """The prescription space is too large to index."""


@dataclass(frozen=True)
class Prescription:
    agent: int
    table: tuple[int, ...]

    def __call__(self, m: int) -> int:
        return self.table[m]


@dataclass(frozen=True)
class JointPrescription:
    per_agent: tuple[Prescription, ...]
    flat_index: int

    def tables(self) -> tuple[tuple[int, ...], ...]:
        return tuple(p.table for p in self.per_agent)


def prescription_space_size(model: DecModel) -> int:
    size = math.prod(a ** m for a, m in zip(model.n_actions, model.n_memories))
    if size >= CAPACITY:
        raise CapacityError(f"|Gamma| = {size} exceeds the 2^63 capacity")
    return size


def decode_tables(flat_index: int, model: DecModel) -> tuple[tuple[int, ...], ...]:
    """Per-agent action tables of joint prescription ``flat_index``."""
    size = prescription_space_size(model)
    if not 0 <= flat_index < size:
        raise ContractViolation(f"prescription index {flat_index} outside [0, {size})")
    tables = []
    for a, nm in zip(reversed(model.n_actions), reversed(model.n_memories)):
        digits = []
        for _ in range(nm):
            flat_index, d = divmod(flat_index, a)
            digits.append(d)
        tables.append(tuple(reversed(digits)))
    return tuple(reversed(tables))


def decode_joint_prescription(flat_index: int, model: DecModel) -> JointPrescription:
    tables = decode_tables(flat_index, model)
    return JointPrescription(
        tuple(Prescription(i, t) for i, t in enumerate(tables)), flat_index
    )


def encode_tables(tables: Sequence[Sequence[int]], model: DecModel) -> int:
    if len(tables) != model.n_agents:
        raise ContractViolation(f"expected {model.n_agents} tables, got {len(tables)}")
    flat = 0
    for i, (table, a, nm) in enumerate(zip(tables, model.n_actions, model.n_memories)):
        if len(table) != nm:
            raise ContractViolation(f"agent {i}: table has {len(table)} entries, needs {nm}")
        for d in table:
            if not 0 <= d < a:
                raise ContractViolation(f"agent {i}: action {d} outside [0, {a})")
            flat = flat * a + d
    return flat


def encode_joint_prescription(gamma: JointPrescription, model: DecModel) -> int:
    for i, p in enumerate(gamma.per_agent):
        if p.agent != i:
            raise ContractViolation(f"prescription {i} is labelled for agent {p.agent}")
    return encode_tables(gamma.tables(), model)


def apply(gamma: JointPrescription, memories: Sequence[int]) -> tuple[int, ...]:
    """Joint action ``u[i] = table_i[m_i]``."""
    if len(memories) != len(gamma.per_agent):
        raise ContractViolation("one memory per agent required")
    out = []
    for p, m in zip(gamma.per_agent, memories):
        if not 0 <= m < len(p.table):
            raise ContractViolation(f"agent {p.agent}: memory {m} outside [0, {len(p.table)})")
        out.append(p.table[m])
    return tuple(out)


def apply_local(gamma: JointPrescription, agent: int, m: int) -> int:
    """What agent ``agent`` does on its own: look up its table only."""
    return gamma.per_agent[agent](m)


class PrescriptionTable:
    """Cached decoder for one model.

    The planner looks up the same joint prescriptions many times, so decoded
    tables are memoized by flat index.
    """

    def __init__(self, model: DecModel):
        self.model = model
        self.size = prescription_space_size(model)
        self._cache: dict[int, tuple[tuple[int, ...], ...]] = {}

    def tables(self, flat_index: int) -> tuple[tuple[int, ...], ...]:
        t = self._cache.get(flat_index)
        if t is None:
            t = decode_tables(flat_index, self.model)
            self._cache[flat_index] = t
        return t

    def actions(self, flat_index: int, memories: Sequence[int]) -> tuple[int, ...]:
        return tuple(t[m] for t, m in zip(self.tables(flat_index), memories))


def format_prescription(gamma: JointPrescription, model: DecModel) -> str:
    """Human-readable table, one row per agent."""
    lines = [f"joint prescription {gamma.flat_index}"]
    for p in gamma.per_agent:
        cells = "  ".join(f"m{m}->u{u}" for m, u in enumerate(p.table))
        lines.append(f"  agent {p.agent}: {cells}")
    return "\n".join(lines)
