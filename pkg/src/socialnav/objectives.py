"""Trajectory objectives and the context-driven objective selector.

Every objective is minimized. The batch helpers take pose arrays shaped
``(n_candidates, n_steps, 3)``; the single-trajectory functions are thin
wrappers so tests and the planner share one code path.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .context import ContextLabel, LABELS
from .world import (INFEASIBLE, ConfigError, CorridorAxis, OccupancyGrid, Pose,
                    occupancy_costs, wrap_angles)

WEIGHT_DROP_THRESHOLD = 0.05


@dataclass(frozen=True)
class TraditionalWeights:
    alpha: float = 0.6  # path
    beta: float = 0.8   # goal
    gamma: float = 0.1  # heading
    delta: float = 0.3  # occupancy

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta)
        if min(vals) < 0 or max(vals) == 0:
            raise ConfigError("traditional weights must be >= 0 and not all zero")


class ObjectiveId(str, Enum):
    TRADITIONAL_COST = "TraditionalCost"
    PERSONAL_SPACE = "PersonalSpace"
    RIGHT_SIDE = "RightSide"
    SOCIAL_GOAL_DISTANCE = "SocialGoalDistance"


@dataclass(frozen=True)
class ProxemicZones:
    intimate: float = 0.45
    personal: float = 1.2
    social: float = 3.6
    gaussian_sigma: float = 0.6

    def __post_init__(self):
        if not (0 < self.intimate < self.personal < self.social):
            raise ConfigError("proxemic zones must satisfy 0 < intimate < personal < social")
        if self.gaussian_sigma <= 0:
            raise ConfigError("gaussian_sigma must be > 0")


_O = ObjectiveId
DEFAULT_ACTIVATION = {
    ContextLabel.PASSING: (_O.TRADITIONAL_COST, _O.PERSONAL_SPACE, _O.RIGHT_SIDE),
    ContextLabel.MEETING: (_O.TRADITIONAL_COST, _O.PERSONAL_SPACE),
    ContextLabel.WALKING_TOGETHER_TOWARD: (_O.TRADITIONAL_COST, _O.PERSONAL_SPACE),
    ContextLabel.WALKING_TOGETHER_AWAY: (_O.TRADITIONAL_COST, _O.PERSONAL_SPACE),
    ContextLabel.QUEUE_WAITING: (_O.TRADITIONAL_COST, _O.PERSONAL_SPACE, _O.SOCIAL_GOAL_DISTANCE),
    ContextLabel.GROUP_JOINING: (_O.TRADITIONAL_COST, _O.PERSONAL_SPACE, _O.SOCIAL_GOAL_DISTANCE),
}


def parse_activation(table: Optional[Mapping]) -> Dict[ContextLabel, tuple]:
    """Merge a ``{label: [objective ids]}`` override onto the default table."""
    out = dict(DEFAULT_ACTIVATION)
    for key, ids in (table or {}).items():
        try:
            lab = ContextLabel(key)
            out[lab] = tuple(ObjectiveId(i) for i in ids)
        except ValueError as exc:
            raise ConfigError(f"objectives.activation.{key}: {exc}") from None
    return out


# -- batch objective kernels -------------------------------------------------

def traditional_terms(poses: np.ndarray, global_path: np.ndarray, goal: Pose,
                      grid: OccupancyGrid, footprint_radius: float):
    """Per-candidate ``(d_path, d_goal, d_heading, d_occ)``; d_occ is inf if infeasible."""
    end = poses[:, -1, :]
    if len(global_path):
        diff = end[:, None, :2] - global_path[None, :, :2]
        d_path = np.sqrt((diff ** 2).sum(axis=2)).min(axis=1)
    else:
        d_path = np.zeros(len(end))
    gx = goal.x - end[:, 0]
    gy = goal.y - end[:, 1]
    d_goal = np.hypot(gx, gy)
    bearing = np.arctan2(gy, gx)
    d_heading = np.where(d_goal > 1e-9, np.abs(wrap_angles(end[:, 2] - bearing)), 0.0)
    occ = occupancy_costs(grid, poses[..., 0], poses[..., 1], footprint_radius)
    return d_path, d_goal, d_heading, occ.max(axis=1)


def traditional_costs(poses, global_path, goal, grid, weights: TraditionalWeights,
                      footprint_radius: float) -> np.ndarray:
    d_path, d_goal, d_head, d_occ = traditional_terms(poses, global_path, goal, grid,
                                                      footprint_radius)
    cost = (weights.alpha * d_path + weights.beta * d_goal + weights.gamma * d_head
            + weights.delta * np.where(np.isfinite(d_occ), d_occ, 0.0))
    return np.where(np.isfinite(d_occ), cost, INFEASIBLE)


def personal_space_costs(poses: np.ndarray, human_xy: np.ndarray, sigma: float) -> np.ndarray:
    if len(human_xy) == 0:
        return np.zeros(poses.shape[0])
    d2 = ((poses[:, :, None, :2] - human_xy[None, None, :, :]) ** 2).sum(axis=3)
    return np.exp(-d2 / (2.0 * sigma * sigma)).sum(axis=2).mean(axis=1)


def right_side_costs(poses: np.ndarray, axis: CorridorAxis) -> np.ndarray:
    ux, uy = axis.direction
    # Travel sense along the axis taken from each trajectory's starting heading.
    sense = np.where(np.cos(poses[:, 0, 2]) * ux + np.sin(poses[:, 0, 2]) * uy >= 0, 1.0, -1.0)
    rx = poses[:, :, 0] - axis.point[0]
    ry = poses[:, :, 1] - axis.point[1]
    left = (ux * ry - uy * rx) * sense[:, None]
    return np.clip(np.maximum(left, 0.0) / axis.half_width, 0.0, 1.0).mean(axis=1)


def social_goal_costs(poses: np.ndarray, social_goal: Pose) -> np.ndarray:
    start = poses[:, 0, :2]
    end = poses[:, -1, :2]
    g = np.array([social_goal.x, social_goal.y])
    d_end = np.hypot(*(end - g).T)
    d_start = np.hypot(*(start - g).T)
    ratio = np.where(d_start > 1e-9, d_end / np.maximum(d_start, 1e-9), d_end)
    return np.clip(ratio, 0.0, 2.0)


# -- single-trajectory API -----------------------------------------------------

def _poses(traj) -> np.ndarray:
    p = traj.poses if hasattr(traj, "poses") else traj
    return np.asarray(p, dtype=float)[None, :, :]


def traditional_cost(traj, global_path, goal: Pose, grid: OccupancyGrid,
                     weights: TraditionalWeights = TraditionalWeights(),
                     footprint_radius: float = 0.3) -> float:
    path = np.asarray([[p.x, p.y] for p in global_path] if global_path and isinstance(
        global_path[0], Pose) else global_path, dtype=float).reshape(-1, 2)
    return float(traditional_costs(_poses(traj), path, goal, grid, weights, footprint_radius)[0])


def personal_space_cost(traj, humans: Sequence, zones: ProxemicZones = ProxemicZones()) -> float:
    xy = np.array([[h.pose.x, h.pose.y] for h in humans], dtype=float).reshape(-1, 2)
    return float(personal_space_costs(_poses(traj), xy, zones.gaussian_sigma)[0])


def right_side_cost(traj, corridor_axis: CorridorAxis) -> float:
    return float(right_side_costs(_poses(traj), corridor_axis)[0])


def social_goal_cost(traj, social_goal: Pose) -> float:
    return float(social_goal_costs(_poses(traj), social_goal)[0])


# -- selector -----------------------------------------------------------------

def social_goal_possible(world) -> bool:
    return world.resource is not None or any(h.group_id is not None for h in world.humans)


def select_objectives(posterior: Optional[Mapping], world=None, activation=None):
    """Active objectives with weights, ``TraditionalCost`` first at weight 1.

    A social objective's weight is the posterior mass of the labels whose
    activation row includes it; weights under 0.05 are dropped. ``None``
    posterior (nobody around, or the traditional planner) leaves only the
    traditional cost. Objectives the world cannot support are dropped too:
    RightSide without a corridor axis, SocialGoalDistance with neither a
    resource nor a grouped person.
    """
    selected = [(ObjectiveId.TRADITIONAL_COST, 1.0)]
    if posterior is None:
        return selected
    post = {ContextLabel(k): float(v) for k, v in posterior.items()}
    total = sum(post.values())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"posterior must sum to 1, got {total}")
    table = parse_activation(activation)
    mass = {}
    for lab in LABELS:
        for oid in table[lab]:
            if oid is not ObjectiveId.TRADITIONAL_COST:
                mass[oid] = mass.get(oid, 0.0) + post.get(lab, 0.0)
    for oid in ObjectiveId:
        w = mass.get(oid, 0.0)
        if w < WEIGHT_DROP_THRESHOLD:
            continue
        if world is not None:
            if oid is ObjectiveId.RIGHT_SIDE and world.corridor_axis is None:
                continue
            if oid is ObjectiveId.SOCIAL_GOAL_DISTANCE and not social_goal_possible(world):
                continue
        selected.append((oid, min(w, 1.0)))
    return selected
