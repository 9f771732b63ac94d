"""Discrete-time scenario executor and run metrics."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from . import objectives as obj
from .context import (ContextLabel, ContextModel, NoHumans, bundled_model,
                      classify, extract_features)
from .objectives import ObjectiveId, ProxemicZones, TraditionalWeights
from .planner import (InvalidEndpoint, NoPath, PlannerConfig, path_blocked,
                      plan_global, plan_step, rollout_batch)
from .scenario import ScenarioConfig
from .socialgoal import SocialGoal, o_formation_goal, queue_goal
from .world import (ConfigError, Human, Pose, Velocity, WorldState, min_human_clearance,
                    min_obstacle_clearance, rasterize, with_humans)

GOAL_REACHED = "GoalReached"
TIMEOUT = "Timeout"
STUCK = "Stuck"
MODES = ("traditional", "paccet")


@dataclass
class StepRecord:
    t: float
    pose: tuple
    cmd: tuple
    posterior: Optional[dict] = None
    label: Optional[str] = None
    low_confidence: bool = False
    active: list = field(default_factory=list)
    chosen_fitness: Optional[float] = None
    chosen_point: Optional[list] = None
    candidates: int = 0
    social_goal: Optional[list] = None
    stuck: bool = False


@dataclass
class RunLog:
    scenario: str
    mode: str
    seed: int
    dt: float
    records: List[StepRecord] = field(default_factory=list)
    status: Optional[str] = None

    def set_status(self, status: str) -> None:
        if self.status is not None:
            raise RuntimeError("run status already set")
        self.status = status

    def poses(self) -> np.ndarray:
        return np.array([r.pose for r in self.records])

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "mode": self.mode, "seed": self.seed,
                "dt": self.dt, "status": self.status,
                "records": [asdict(r) for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"


@dataclass
class Metrics:
    path_length: float
    time_to_goal: Optional[float]
    min_human_clearance: Optional[float]
    min_obstacle_clearance: Optional[float]
    proxemic_intrusions: int
    intimate_intrusions: int
    success: bool
    status: str
    final_distance_to_goal: float
    final_distance_to_social_goal: Optional[float] = None
    mean_lateral_offset: Optional[float] = None
    max_lateral_offset: Optional[float] = None
    steps: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def humans_at(config: ScenarioConfig, t: float) -> tuple:
    """Scripted humans at time ``t`` (static or constant velocity)."""
    out = []
    for h in config.humans:
        if h.velocity:
            p = Pose(h.pose.x + h.velocity[0] * t, h.pose.y + h.velocity[1] * t, h.pose.theta)
            out.append(Human(p, h.velocity, h.group_id))
        else:
            out.append(h)
    return tuple(out)


def _queue_members(humans, resource: Pose):
    head = min(humans, key=lambda h: math.hypot(h.pose.x - resource.x, h.pose.y - resource.y))
    if head.group_id is None:
        return [head]
    return [h for h in humans if h.group_id == head.group_id]


def _group_members(humans, near: Pose):
    grouped = [h for h in humans if h.group_id is not None]
    if not grouped:
        return []
    first = min(grouped, key=lambda h: math.hypot(h.pose.x - near.x, h.pose.y - near.y))
    return [h for h in grouped if h.group_id == first.group_id]


def social_goal_for(humans, resource, robot: Pose, posterior=None,
                    spacing: float = 1.0) -> Optional[SocialGoal]:
    """Queue tail or O-formation slot, whichever the context favours."""
    p_queue = p_group = 0.0
    if posterior:
        p_queue = posterior.get(ContextLabel.QUEUE_WAITING, 0.0)
        p_group = posterior.get(ContextLabel.GROUP_JOINING, 0.0)
    group = _group_members(humans, robot)
    if resource is not None and humans and (p_queue >= p_group or not group):
        return queue_goal(_queue_members(humans, resource), resource, spacing)
    if group:
        return o_formation_goal(group)
    if resource is not None:
        return queue_goal([], resource, spacing)
    return None


def reference_social_goal(config: ScenarioConfig) -> Optional[SocialGoal]:
    spacing = config.objectives.get("queue_spacing", 1.0)
    if config.resource is None and not any(h.group_id is not None for h in config.humans):
        return None
    return social_goal_for(config.humans, config.resource, config.robot_start, None, spacing)


def settings_for(config: ScenarioConfig):
    """Planner settings from the scenario; bad values raise ``ConfigError``."""
    oc = config.objectives
    try:
        return (PlannerConfig(**config.planner),
                TraditionalWeights(**oc.get("weights", {})),
                ProxemicZones(**oc.get("zones", {})),
                obj.parse_activation(oc.get("activation")),
                float(oc.get("queue_spacing", 1.0)))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"planner/objectives: {exc}") from None


def run_scenario(config: ScenarioConfig, mode: str = "paccet", seed: int = 0,
                 model: Optional[ContextModel] = None):
    """Execute one scenario; returns ``(RunLog, Metrics)``.

    Nothing here is random; ``seed`` is recorded so that batch runs stay
    addressable by ``(scenario, mode, seed)``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    cfg, weights, zones, activation, spacing = settings_for(config)
    if mode == "paccet" and model is None:
        model = bundled_model()
    timeout = float(config.sim.get("timeout_s", 120.0))
    stuck_cap = int(config.sim.get("stuck_cycles", 50))
    spec = config.robot_spec
    grid = rasterize(config)
    dt = cfg.dt
    log = RunLog(config.name, mode, seed, dt)

    robot = config.robot_start
    vel = Velocity(*config.robot_velocity)
    prev_world = None
    path, path_goal = None, None
    coll_key, coll_grid = None, None
    stuck_run = 0
    k = 0
    while True:
        t = k * dt
        humans = humans_at(config, t)
        world = WorldState(robot, vel, spec, humans, config.obstacles, grid, config.goal,
                           config.corridor_axis, config.resource, t)
        key = tuple((h.pose.x, h.pose.y) for h in humans)
        if key != coll_key:
            coll_key, coll_grid = key, with_humans(grid, config.obstacles, humans, spec.radius)

        posterior, label, low_conf = None, None, False
        if mode == "paccet":
            try:
                cls = classify(model, extract_features(world, prev_world))
                posterior, label, low_conf = cls.posterior, cls.label.value, cls.low_confidence
            except NoHumans:
                pass
        selected = obj.select_objectives(posterior, world, activation)
        social = None
        if any(oid is ObjectiveId.SOCIAL_GOAL_DISTANCE for oid, _ in selected):
            social = social_goal_for(humans, config.resource, robot, posterior, spacing)
        active_goal = social.pose if social is not None else config.goal

        rec = StepRecord(t=t, pose=(robot.x, robot.y, robot.theta), cmd=(0.0, 0.0, 0.0),
                         posterior=None if posterior is None else
                         {lab.value: p for lab, p in posterior.items()},
                         label=label, low_confidence=low_conf,
                         active=[[oid.value, w] for oid, w in selected],
                         social_goal=None if social is None else
                         [social.pose.x, social.pose.y, social.pose.theta])

        if robot.distance_to(active_goal) <= spec.goal_tolerance:
            log.records.append(rec)
            log.set_status(GOAL_REACHED)
            break
        if t >= timeout - 1e-9:
            log.records.append(rec)
            log.set_status(TIMEOUT)
            break

        if (path is None or path_goal != active_goal
                or path_blocked(coll_grid, path, spec.radius)):
            try:
                path = plan_global(coll_grid, robot, active_goal, spec.radius)
            except (NoPath, InvalidEndpoint):
                path = None
            path_goal = active_goal

        if path is None:
            cmd, stuck = Velocity(0.0, 0.0, 0.0), True
        else:
            cmd, diag = plan_step(world, posterior, social, cfg, weights, zones, path,
                                  activation, coll_grid, mode)
            stuck = diag.stuck
            rec.active = [[oid.value, w] for oid, w in diag.active]
            rec.candidates = len(diag.candidates)
            if diag.chosen is not None:
                rec.chosen_fitness = diag.chosen_fitness
                rec.chosen_point = [float(v) for v in diag.chosen_point]
        rec.cmd = (cmd.vx, cmd.vy, cmd.vtheta)
        rec.stuck = stuck
        log.records.append(rec)
        stuck_run = stuck_run + 1 if stuck else 0
        if stuck_run >= stuck_cap:
            log.set_status(STUCK)
            break

        nxt = rollout_batch(robot, np.array([[cmd.vx, cmd.vy, cmd.vtheta]]), 1, dt)[0, 1]
        robot = Pose(*nxt)
        vel = cmd
        prev_world = world
        k += 1
    return log, compute_metrics(log, config)


def _lateral_offsets(poses: np.ndarray, axis) -> np.ndarray:
    ux, uy = axis.direction
    return ux * (poses[:, 1] - axis.point[1]) - uy * (poses[:, 0] - axis.point[0])


def compute_metrics(log: RunLog, config: ScenarioConfig) -> Metrics:
    if not log.records:
        raise ValueError("cannot compute metrics of an empty log")
    zones = ProxemicZones(**config.objectives.get("zones", {}))
    poses = log.poses()
    steps = np.diff(poses[:, :2], axis=0)
    length = float(np.hypot(steps[:, 0], steps[:, 1]).sum()) if len(steps) else 0.0
    h_clear, o_clear = [], []
    for rec in log.records:
        p = Pose(*rec.pose)
        h_clear.append(min_human_clearance(p, humans_at(config, rec.t)))
        o_clear.append(min_obstacle_clearance(p, config.obstacles))
    h_min = min(h_clear)
    o_min = min(o_clear)
    final = Pose(*log.records[-1].pose)
    ref = reference_social_goal(config)
    lat_mean = lat_max = None
    if config.corridor_axis is not None:
        off = np.abs(_lateral_offsets(poses, config.corridor_axis))
        lat_mean, lat_max = float(off.mean()), float(off.max())
    success = log.status == GOAL_REACHED
    return Metrics(
        path_length=length,
        time_to_goal=log.records[-1].t if success else None,
        min_human_clearance=None if math.isinf(h_min) else h_min,
        min_obstacle_clearance=None if math.isinf(o_min) else o_min,
        proxemic_intrusions=int(sum(c < zones.personal for c in h_clear)),
        intimate_intrusions=int(sum(c < zones.intimate for c in h_clear)),
        success=success,
        status=log.status,
        final_distance_to_goal=final.distance_to(config.goal),
        final_distance_to_social_goal=None if ref is None else final.distance_to(ref.pose),
        mean_lateral_offset=lat_mean,
        max_lateral_offset=lat_max,
        steps=len(log.records),
    )


def trajectory_csv(log: RunLog, config: ScenarioConfig) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "x", "y", "theta", "vx", "vy", "vtheta", "min_human_clearance"])
    for rec in log.records:
        c = min_human_clearance(Pose(*rec.pose), humans_at(config, rec.t))
        wr.writerow([repr(rec.t), *map(repr, rec.pose), *map(repr, rec.cmd),
                     "" if math.isinf(c) else repr(c)])
    return buf.getvalue()
