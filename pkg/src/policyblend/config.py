"""Run-configuration loading and validation.

A run configuration is a single YAML document with sections
{arena, scenario, experts, cost, planner, controller, mode, sweep}.
Pinned per-environment profiles ship with the package under
``policyblend/profiles``; acceptance runs use those unmodified.
"""

from __future__ import annotations

import copy
from importlib import resources

import yaml

from .errors import ConfigError

SCHEMA_VERSION = 1

_REQUIRED_SECTIONS = ("arena", "scenario", "experts", "cost", "planner", "controller", "mode")

_EXPERT_SECTIONS = {
    "goal_attractor": ("k_p", "k_d", "c_soft", "w_goal"),
    "obstacle_repulsor": ("k_rep", "influence_radius", "w_far", "w_near"),
    "curl": ("k_curl", "w_curl"),
    "velocity_damper": ("k_damp", "w_damp"),
}


def load_config(path) -> dict:
    try:
        with open(path) as f:
            cfg = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    validate_config(cfg)
    return cfg


def default_profile(name: str) -> dict:
    """Load a pinned profile shipped with the package (toy_box, toy_maze)."""
    ref = resources.files("policyblend").joinpath(f"profiles/{name}.yaml")
    try:
        cfg = yaml.safe_load(ref.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"no such profile: {name!r}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"config schema_version must be {SCHEMA_VERSION}")
    for sec in _REQUIRED_SECTIONS:
        if sec not in cfg:
            raise ConfigError(f"missing config section: {sec!r}")
    for name, keys in _EXPERT_SECTIONS.items():
        sub = cfg["experts"].get(name)
        if not isinstance(sub, dict):
            raise ConfigError(f"experts.{name} section missing")
        for k in keys:
            v = sub.get(k)
            if not isinstance(v, (int, float)):
                raise ConfigError(f"experts.{name}.{k} must be a number")
            if k.startswith(("k_", "w_")) and k != "k_d" and v < 0:
                raise ConfigError(f"experts.{name}.{k} must be nonnegative")
    for k in ("w_goal", "w_col", "w_prox", "w_ctrl", "influence"):
        if k not in cfg["cost"]:
            raise ConfigError(f"cost.{k} missing")
    kind = cfg["controller"].get("kind")
    if kind not in ("reactive_fixed", "hipbi", "mpc_icem"):
        raise ConfigError(f"controller.kind must be one of reactive_fixed|hipbi|mpc_icem, got {kind!r}")
    mode = cfg["mode"].get("mode")
    if mode not in ("sync", "async"):
        raise ConfigError("mode.mode must be 'sync' or 'async'")
    if mode == "async" and int(cfg["mode"].get("latency_steps", 1)) < 1:
        raise ConfigError("mode.latency_steps must be >= 1")


def with_overrides(cfg: dict, **overrides) -> dict:
    """Deep-copied config with dotted-path overrides, e.g. planner__horizon=25."""
    out = copy.deepcopy(cfg)
    for key, value in overrides.items():
        node = out
        parts = key.split("__")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    validate_config(out)
    return out
