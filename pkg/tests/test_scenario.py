import copy
import json

import pytest

from socialnav.scenario import (BUNDLED, apply_override, load_scenario, load_scenario_data,
                                parse_scenario)
from socialnav.world import ConfigError


@pytest.fixture
def hallway():
    return load_scenario_data("hallway_human_vs_object")


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_parse(name):
    cfg = load_scenario(name)
    assert cfg.name == name
    assert 0 <= cfg.goal.x < cfg.world.width_m and 0 <= cfg.goal.y < cfg.world.height_m


@pytest.mark.parametrize("path,value,field", [
    ("", "bogus", "bogus"),
    ("robot", "wheels", "robot.wheels"),
    ("world", "depth_m", "world.depth_m"),
])
def test_unknown_field_named(hallway, path, value, field):
    data = copy.deepcopy(hallway)
    (data[path] if path else data)[value] = 1
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        parse_scenario(data)


def test_unknown_field_in_list_item(hallway):
    hallway["humans"][0]["mood"] = "happy"
    with pytest.raises(ConfigError, match=r"humans\[0\]\.mood"):
        parse_scenario(hallway)


def test_missing_and_mistyped_fields(hallway):
    bad = copy.deepcopy(hallway)
    del bad["goal"]
    with pytest.raises(ConfigError, match="goal"):
        parse_scenario(bad)
    bad = copy.deepcopy(hallway)
    del bad["humans"][0]["x"]
    with pytest.raises(ConfigError, match=r"humans\[0\]\.x"):
        parse_scenario(bad)
    bad = copy.deepcopy(hallway)
    bad["robot"]["x"] = "left"
    with pytest.raises(ConfigError, match="robot.x"):
        parse_scenario(bad)
    bad = copy.deepcopy(hallway)
    bad["obstacles"][0]["type"] = "blob"
    with pytest.raises(ConfigError, match="blob"):
        parse_scenario(bad)


def test_goal_outside_world(hallway):
    hallway["goal"]["x"] = 99.0
    with pytest.raises(ConfigError, match="goal"):
        parse_scenario(hallway)


def test_override_parses_json_values(hallway):
    out = apply_override(hallway, "robot.v_max=0.5")
    assert out["robot"]["v_max"] == 0.5
    assert hallway["robot"]["v_max"] == 1.0  # input untouched
    out = apply_override(hallway, "humans.0.vx=-0.3")
    assert out["humans"][0]["vx"] == -0.3
    out = apply_override(hallway, 'objectives.activation={"Passing": ["TraditionalCost"]}')
    assert out["objectives"]["activation"] == {"Passing": ["TraditionalCost"]}
    with pytest.raises(ConfigError):
        apply_override(hallway, "robot.v_max")


def test_load_scenario_from_file_with_overrides(tmp_path, hallway):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(hallway))
    cfg = load_scenario(p, ["robot.goal_tolerance=0.5"])
    assert cfg.robot_spec.goal_tolerance == 0.5
    with pytest.raises(ConfigError, match="not found"):
        load_scenario(tmp_path / "missing.json")
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_scenario(p)
