"""Decentralized online planning for teams that share part of their history.

Agents that share a seed run identical tree searches over the common
history, so they agree on a joint prescription without communicating and
each applies its own slice to its private memory.
"""
from phsplan.belief import Belief, Particle, ParticleDepletion, init_belief, revive_belief, update_belief
from phsplan.correlation import CorrelationDevice
from phsplan.domains import build_intrusion_model, build_tiny_team, get_domain, list_domains
from phsplan.harness import DigestMismatch, EpisodeTrace, SweepResult, lockstep_verify, run_episode, sweep
from phsplan.model import ContractViolation, DecModel, ExactTablesUnavailable, validate_model
from phsplan.planner import Planner, PlannerConfig, cutoff_depth, tree_digest, ucb1_select
from phsplan.prescriptions import (
    CapacityError,
    JointPrescription,
    Prescription,
    decode_joint_prescription,
    encode_joint_prescription,
    prescription_space_size,
)

__version__ = "0.1.0"

__all__ = [
    "Belief",
    "CapacityError",
    "ContractViolation",
    "CorrelationDevice",
    "DecModel",
    "DigestMismatch",
    "EpisodeTrace",
    "ExactTablesUnavailable",
    "JointPrescription",
    "Particle",
    "ParticleDepletion",
    "Planner",
    "PlannerConfig",
    "Prescription",
    "SweepResult",
    "build_intrusion_model",
    "build_tiny_team",
    "cutoff_depth",
    "decode_joint_prescription",
    "encode_joint_prescription",
    "get_domain",
    "init_belief",
    "list_domains",
    "lockstep_verify",
    "prescription_space_size",
    "revive_belief",
    "run_episode",
    "sweep",
    "tree_digest",
    "ucb1_select",
    "update_belief",
]
