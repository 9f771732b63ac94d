"""Scenario files: JSON parsing, strict validation and bundled scenarios.

Unknown keys are rejected with the dotted path of the offending field, so a
typo in a scenario never silently falls back to a default.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .world import (Circle, ConfigError, CorridorAxis, Human, Pose, Rect,
                    RobotSpec)

BUNDLED = ("hallway_human_vs_object", "tight_passage", "queue_join",
           "open_field", "group_join")

_SPEC_FIELDS = ("radius", "drive", "v_max", "v_min", "vtheta_max",
                "accel_linear", "accel_angular", "goal_tolerance")

_SCHEMA = {
    "name": str,
    "description": str,
    "world": {"width_m": float, "height_m": float, "resolution_m": float},
    "robot": dict(x=float, y=float, theta=float, vx=float, vy=float, vtheta=float,
                  **{k: (str if k == "drive" else float) for k in _SPEC_FIELDS}),
    "goal": {"x": float, "y": float, "theta": float},
    "humans": [{"x": float, "y": float, "theta": float, "vx": float, "vy": float,
                "group_id": int}],
    "obstacles": [{"type": str, "geometry": dict}],
    "context_hint": str,
    "corridor_axis": {"point": list, "direction": list, "half_width": float},
    "resource": {"x": float, "y": float, "theta": float},
    "planner": {"dt": float, "horizon": float, "linear_samples": int,
                "angular_samples": int, "lateral_samples": int},
    "objectives": {"weights": {"alpha": float, "beta": float, "gamma": float, "delta": float},
                   "zones": {"intimate": float, "personal": float, "social": float,
                             "gaussian_sigma": float},
                   "activation": dict,
                   "queue_spacing": float},
    "sim": {"timeout_s": float, "stuck_cycles": int},
}

_REQUIRED = ("world", "robot", "goal")


def _check(value, schema, path):
    if isinstance(schema, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path or '<root>'}: expected an object")
        for key in value:
            if key not in schema:
                raise ConfigError(f"unknown field '{path + '.' if path else ''}{key}'")
            _check(value[key], schema[key], f"{path + '.' if path else ''}{key}")
    elif isinstance(schema, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        for i, item in enumerate(value):
            _check(item, schema[0], f"{path}[{i}]")
    elif schema is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
    elif schema is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
    elif not isinstance(value, schema):
        raise ConfigError(f"{path}: expected {schema.__name__}")


@dataclass(frozen=True)
class WorldBounds:
    width_m: float
    height_m: float
    resolution_m: float


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    world: WorldBounds
    robot_start: Pose
    robot_spec: RobotSpec
    goal: Pose
    humans: tuple = ()
    obstacles: tuple = ()
    context_hint: Optional[str] = None
    corridor_axis: Optional[CorridorAxis] = None
    resource: Optional[Pose] = None
    robot_velocity: tuple = (0.0, 0.0, 0.0)
    planner: dict = field(default_factory=dict)
    objectives: dict = field(default_factory=dict)
    sim: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _obstacle(spec: dict, path: str):
    geom = spec["geometry"]
    kind = spec["type"]
    try:
        if kind == "circle":
            _check(geom, {"center": list, "radius": float}, path + ".geometry")
            return Circle(tuple(map(float, geom["center"])), float(geom["radius"]))
        if kind == "rect":
            _check(geom, {"min": list, "max": list}, path + ".geometry")
            return Rect(tuple(map(float, geom["min"])), tuple(map(float, geom["max"])))
    except KeyError as exc:
        raise ConfigError(f"{path}.geometry: missing field {exc.args[0]!r}") from None
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"{path}.type: unknown obstacle type {kind!r}")


_REQUIRED_ITEM = {"goal": ("x", "y"), "humans": ("x", "y"), "obstacles": ("type", "geometry"),
                  "resource": ("x", "y"), "corridor_axis": ("point", "direction", "half_width")}


def _require_items(data: dict) -> None:
    for key, fields in _REQUIRED_ITEM.items():
        if key not in data:
            continue
        items = data[key] if isinstance(data[key], list) else [data[key]]
        for i, item in enumerate(items):
            where = f"{key}[{i}]" if isinstance(data[key], list) else key
            for f in fields:
                if f not in item:
                    raise ConfigError(f"missing required field '{where}.{f}'")


def parse_scenario(data: dict) -> ScenarioConfig:
    _check(data, _SCHEMA, "")
    _require_items(data)
    for key in _REQUIRED:
        if key not in data:
            raise ConfigError(f"missing required field '{key}'")
    w = data["world"]
    for key in ("width_m", "height_m", "resolution_m"):
        if key not in w:
            raise ConfigError(f"missing required field 'world.{key}'")
    world = WorldBounds(float(w["width_m"]), float(w["height_m"]), float(w["resolution_m"]))
    if world.resolution_m <= 0:
        raise ConfigError("world.resolution_m: must be > 0")
    if world.width_m <= 0 or world.height_m <= 0:
        raise ConfigError("world: bounds must be positive")

    r = data["robot"]
    spec = RobotSpec(**{k: r[k] for k in _SPEC_FIELDS if k in r})
    start = Pose(r.get("x", 0.0), r.get("y", 0.0), r.get("theta", 0.0))
    vel = (float(r.get("vx", 0.0)), float(r.get("vy", 0.0)), float(r.get("vtheta", 0.0)))
    g = data["goal"]
    goal = Pose(g["x"], g["y"], g.get("theta", 0.0))
    for label, p in (("goal", goal), ("robot", start)):
        if not (0 <= p.x < world.width_m and 0 <= p.y < world.height_m):
            raise ConfigError(f"{label}: position outside world bounds")

    humans = []
    for i, h in enumerate(data.get("humans", [])):
        v = (float(h.get("vx", 0.0)), float(h.get("vy", 0.0)))
        humans.append(Human(Pose(h["x"], h["y"], h.get("theta", 0.0)),
                            v if any(v) else None, h.get("group_id")))
    obstacles = tuple(_obstacle(o, f"obstacles[{i}]")
                      for i, o in enumerate(data.get("obstacles", [])))

    axis = None
    if "corridor_axis" in data:
        a = data["corridor_axis"]
        axis = CorridorAxis(tuple(map(float, a["point"])), tuple(map(float, a["direction"])),
                            float(a["half_width"]))
    resource = None
    if "resource" in data:
        res = data["resource"]
        resource = Pose(res["x"], res["y"], res.get("theta", 0.0))

    return ScenarioConfig(
        name=data.get("name", "unnamed"),
        world=world,
        robot_start=start,
        robot_spec=spec,
        goal=goal,
        humans=tuple(humans),
        obstacles=obstacles,
        context_hint=data.get("context_hint"),
        corridor_axis=axis,
        resource=resource,
        robot_velocity=vel,
        planner=dict(data.get("planner", {})),
        objectives=copy.deepcopy(data.get("objectives", {})),
        sim=dict(data.get("sim", {})),
        raw=copy.deepcopy(data),
    )


def load_scenario_data(path) -> dict:
    """Raw scenario JSON from a file path or a bundled scenario name."""
    p = Path(path)
    if not p.exists():
        if str(path) in BUNDLED:
            p = bundled_path(str(path))
        else:
            raise ConfigError(f"scenario file not found: {path}")
    with open(p, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def load_scenario(path, overrides=()) -> ScenarioConfig:
    data = load_scenario_data(path)
    for assignment in overrides:
        data = apply_override(data, assignment)
    return parse_scenario(data)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("socialnav") / "data" / "scenarios" / f"{name}.json"))


def bundled_scenario(name: str) -> ScenarioConfig:
    return load_scenario(bundled_path(name))


def apply_override(data: dict, assignment: str) -> dict:
    """Apply a ``dotted.key=value`` override; value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} must look like key=value")
    key, raw = assignment.split("=", 1)
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    out = copy.deepcopy(data)
    node = out
    parts = key.split(".")
    for part in parts[:-1]:
        if isinstance(node, list):
            node = node[int(part)]
        else:
            node = node.setdefault(part, {})
    if isinstance(node, list):
        node[int(parts[-1])] = value
    else:
        node[parts[-1]] = value
    return out
