"""Concrete models: the intrusion-response domain and tiny oracle instances."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from phsplan.domains.intrusion import (
    Alert,
    DependencyGraph,
    Exploit,
    IntrusionConfig,
    IntrusionModel,
    build_intrusion_model,
    probe_config,
)
from phsplan.domains.tabular import TabularModel
from phsplan.domains.toys import TINY_TEAM_VARIANTS, build_tiny_team, single_agent_bandit
from phsplan.model import DecModel

DEFAULT_INTRUSION_JSON = Path(__file__).with_name("intrusion_default.json")

DOMAINS = {
    "intrusion": "two-defender intrusion response, 1-step delayed sharing (|Gamma| = 256)",
    **{name: fn.__doc__.strip().splitlines()[0].replace("``", "") for name, fn in TINY_TEAM_VARIANTS.items()},
}


def list_domains() -> dict[str, str]:
    return dict(DOMAINS)


def get_domain(name: str, params: dict[str, Any] | None = None) -> DecModel:
    """Build a registered domain; ``params`` only applies to ``intrusion``."""
    if name == "intrusion":
        model = build_intrusion_model(params or None)
        model.build_spec = ("intrusion", model.config)
        return model
    if params:
        raise ValueError(f"domain {name!r} takes no parameters")
    model = build_tiny_team(name)
    model.build_spec = (name, None)
    return model


def rebuild(spec: tuple[str, Any]) -> DecModel:
    """Inverse of ``model.build_spec``; lets another process build the same model."""
    name, params = spec
    if name == "intrusion":
        model = IntrusionModel(params)
        model.build_spec = spec
        return model
    if name == "single-agent-bandit":
        return single_agent_bandit(params)
    return get_domain(name)


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a run configuration: ``{"domain": ..., "params": {...}, "planner": {...}}``."""
    doc = json.loads(Path(path).read_text())
    if "domain" not in doc:
        # a bare intrusion topology document
        doc = {"domain": "intrusion", "params": doc}
    return doc


__all__ = [
    "Alert",
    "DependencyGraph",
    "Exploit",
    "IntrusionConfig",
    "IntrusionModel",
    "TabularModel",
    "TINY_TEAM_VARIANTS",
    "build_intrusion_model",
    "build_tiny_team",
    "get_domain",
    "list_domains",
    "load_config",
    "probe_config",
    "rebuild",
]
