import copy

import pytest
import yaml

from policyblend.config import (default_profile, load_config, validate_config,
                                with_overrides)
from policyblend.errors import ConfigError


def test_default_profiles_load():
    for name in ("toy_box", "toy_maze"):
        cfg = default_profile(name)
        assert cfg["scenario"]["env_kind"] == name


def test_unknown_profile():
    with pytest.raises(ConfigError):
        default_profile("toy_sphere")


def test_load_config_round_trip(tmp_path, box_profile):
    p = tmp_path / "run.yaml"
    p.write_text(yaml.safe_dump(box_profile))
    assert load_config(p) == box_profile


def test_load_config_bad_yaml(tmp_path):
    p = tmp_path / "broken.yaml"
    p.write_text("experts: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_validate_rejects_non_mapping():
    with pytest.raises(ConfigError):
        validate_config(["not", "a", "mapping"])


def test_validate_schema_version(box_profile):
    cfg = copy.deepcopy(box_profile)
    cfg["schema_version"] = 2
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_validate_missing_section(box_profile):
    cfg = copy.deepcopy(box_profile)
    del cfg["planner"]
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_validate_expert_params(box_profile):
    cfg = copy.deepcopy(box_profile)
    cfg["experts"]["curl"]["k_curl"] = -1.0
    with pytest.raises(ConfigError):
        validate_config(cfg)
    cfg = copy.deepcopy(box_profile)
    cfg["experts"]["goal_attractor"]["k_p"] = "strong"
    with pytest.raises(ConfigError):
        validate_config(cfg)
    cfg = copy.deepcopy(box_profile)
    del cfg["experts"]["velocity_damper"]
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_validate_controller_and_mode(box_profile):
    cfg = copy.deepcopy(box_profile)
    cfg["controller"]["kind"] = "pid"
    with pytest.raises(ConfigError):
        validate_config(cfg)
    cfg = copy.deepcopy(box_profile)
    cfg["mode"] = {"mode": "async", "latency_steps": 0}
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_validate_cost_keys(box_profile):
    cfg = copy.deepcopy(box_profile)
    del cfg["cost"]["w_col"]
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_with_overrides_deep_copies(box_profile):
    out = with_overrides(box_profile, planner__horizon=25,
                         controller__kind="mpc_icem")
    assert out["planner"]["horizon"] == 25
    assert out["controller"]["kind"] == "mpc_icem"
    assert box_profile["planner"]["horizon"] == 75
    assert box_profile["controller"]["kind"] == "hipbi"


def test_with_overrides_validates(box_profile):
    with pytest.raises(ConfigError):
        with_overrides(box_profile, controller__kind="pid")
