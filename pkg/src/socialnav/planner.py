"""Global A* over the occupancy grid and the multi-objective local planner."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import ndimage

from . import objectives as obj
from .objectives import ObjectiveId, ProxemicZones, TraditionalWeights
from .pareto import rank_candidates
from .world import (OccupancyGrid, Pose, RobotSpec, Velocity, WorldState,
                    occupancy_costs, with_humans, wrap_angles)


class NoPath(RuntimeError):
    pass


class InvalidEndpoint(ValueError):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    dt: float = 0.1
    horizon: float = 2.0
    linear_samples: int = 11
    angular_samples: int = 11
    lateral_samples: int = 5

    def __post_init__(self):
        if min(self.linear_samples, self.angular_samples, self.lateral_samples) < 1:
            raise ValueError("sample counts must be >= 1")
        if self.dt <= 0 or self.horizon < self.dt:
            raise ValueError("need dt > 0 and horizon >= dt")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class Trajectory:
    command: Velocity
    poses: np.ndarray  # (steps + 1, 3)
    objective_point: Optional[np.ndarray] = None
    feasible: bool = True

    @property
    def pose_list(self) -> List[Pose]:
        return [Pose(*p) for p in self.poses]


# -- global planning -----------------------------------------------------------

def _blocked(grid: OccupancyGrid, radius: float) -> np.ndarray:
    """Cells whose center cannot host the robot footprint."""
    reach = int(math.ceil(radius / grid.resolution))
    d = np.arange(-reach, reach + 1)
    dr, dc = np.meshgrid(d, d, indexing="ij")
    disk = np.hypot(dr, dc) * grid.resolution <= radius + 1e-9
    # off-map cells count as lethal, as in occupancy_costs
    lethal = np.pad(grid.lethal, 1, constant_values=True)
    return (ndimage.binary_dilation(lethal, structure=disk) | lethal)[1:-1, 1:-1]


_MOVES = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def plan_global(grid: OccupancyGrid, start: Pose, goal: Pose,
                robot_radius: float = 0.0) -> List[Pose]:
    """8-connected A* with octile heuristic; step cost ``length * (1 + cell cost)``.

    ``robot_radius`` > 0 plans in configuration space (cells whose footprint
    would touch a lethal cell are impassable).
    """
    if not (grid.in_bounds(start.x, start.y) and grid.in_bounds(goal.x, goal.y)):
        raise InvalidEndpoint("start or goal outside the grid")
    blocked = _blocked(grid, robot_radius) if robot_radius > 0 else grid.lethal
    s = tuple(int(v) for v in grid.cell_of(start.x, start.y))
    g = tuple(int(v) for v in grid.cell_of(goal.x, goal.y))
    if blocked[s] or blocked[g]:
        raise InvalidEndpoint("start or goal lies in a lethal region")
    res = grid.resolution
    cost = np.where(blocked, 0.0, grid.cells)
    H, W = grid.height, grid.width
    sqrt2 = math.sqrt(2.0)

    def h(r, c):
        dr, dc = abs(r - g[0]), abs(c - g[1])
        return res * (max(dr, dc) + (sqrt2 - 1.0) * min(dr, dc))

    best = {s: 0.0}
    parent = {s: None}
    heap = [(h(*s), 0.0, s)]
    closed = set()
    while heap:
        _, gcost, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == g:
            break
        closed.add(cur)
        r, c = cur
        for dr, dc in _MOVES:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < H and 0 <= nc < W) or blocked[nr, nc]:
                continue
            step = res * (sqrt2 if dr and dc else 1.0) * (1.0 + cost[nr, nc])
            ng = gcost + step
            nxt = (nr, nc)
            if ng < best.get(nxt, math.inf) - 1e-12:
                best[nxt] = ng
                parent[nxt] = cur
                heapq.heappush(heap, (ng + h(nr, nc), ng, nxt))
    else:
        raise NoPath("no path between start and goal")
    if g not in parent:
        raise NoPath("no path between start and goal")

    cells = []
    node = g
    while node is not None:
        cells.append(node)
        node = parent[node]
    cells.reverse()
    xy = [grid.cell_center(r, c) for r, c in cells]
    poses = []
    for i, (x, y) in enumerate(xy):
        if i + 1 < len(xy):
            th = math.atan2(xy[i + 1][1] - y, xy[i + 1][0] - x)
        else:
            th = goal.theta
        poses.append(Pose(float(x), float(y), th))
    return poses


def path_length(path: Sequence[Pose]) -> float:
    return sum(a.distance_to(b) for a, b in zip(path, path[1:]))


def path_blocked(grid: OccupancyGrid, path: Sequence[Pose], robot_radius: float) -> bool:
    if not path:
        return True
    xs = np.array([p.x for p in path])
    ys = np.array([p.y for p in path])
    return bool(np.any(~np.isfinite(occupancy_costs(grid, xs, ys, robot_radius))))


# -- local planning --------------------------------------------------------------

def _window(current: float, accel: float, dt: float, lo: float, hi: float, n: int):
    a = max(lo, current - accel * dt)
    b = min(hi, current + accel * dt)
    if a > b:  # current outside limits: clamp into them
        a = b = min(max(current, lo), hi)
    return np.linspace(a, b, n) if n > 1 else np.array([(a + b) / 2.0])


def sample_velocities(current: Velocity, spec: RobotSpec, cfg: PlannerConfig) -> List[Velocity]:
    """Dynamic-window grid of commands plus the stop command."""
    vx = _window(current.vx, spec.accel_linear, cfg.dt, spec.v_min, spec.v_max, cfg.linear_samples)
    vth = _window(current.vtheta, spec.accel_angular, cfg.dt, -spec.vtheta_max, spec.vtheta_max,
                  cfg.angular_samples)
    if spec.holonomic:
        vy = _window(current.vy, spec.accel_linear, cfg.dt, -spec.v_max, spec.v_max,
                     cfg.lateral_samples)
    else:
        vy = np.array([0.0])
    out = [Velocity(float(a), float(b), float(c)) for a in vx for b in vy for c in vth
           if math.hypot(a, b) <= spec.v_max + 1e-12]
    if Velocity(0.0, 0.0, 0.0) not in out:
        out.append(Velocity(0.0, 0.0, 0.0))
    return out


def rollout_batch(start: Pose, cmds: np.ndarray, steps: int, dt: float) -> np.ndarray:
    """Closed-form constant-command integration, shape ``(n, steps + 1, 3)``.

    Body-frame ``(vx, vy)`` rotate with the heading; with ``vtheta != 0`` the
    path is a circular arc. Every pose is computed from ``start`` directly,
    so there is no accumulated integration error.
    """
    cmds = np.atleast_2d(np.asarray(cmds, dtype=float))
    vx, vy, w = cmds[:, 0:1], cmds[:, 1:2], cmds[:, 2:3]
    t = (np.arange(steps + 1) * dt)[None, :]
    th0 = start.theta
    th = th0 + w * t
    turning = np.abs(w) > 1e-12
    ws = np.where(turning, w, 1.0)
    s0, c0 = math.sin(th0), math.cos(th0)
    s, c = np.sin(th), np.cos(th)
    arc_x = (vx * (s - s0) + vy * (c - c0)) / ws
    arc_y = (-vx * (c - c0) + vy * (s - s0)) / ws
    lin_x = (vx * c0 - vy * s0) * t
    lin_y = (vx * s0 + vy * c0) * t
    x = start.x + np.where(turning, arc_x, lin_x)
    y = start.y + np.where(turning, arc_y, lin_y)
    return np.stack([x, y, wrap_angles(th)], axis=2)


def rollout(start: Pose, cmd: Velocity, cfg: PlannerConfig = PlannerConfig()) -> Trajectory:
    poses = rollout_batch(start, cmd.as_array()[None, :], cfg.steps, cfg.dt)[0]
    return Trajectory(cmd, poses)


@dataclass
class PlanDiagnostics:
    candidates: List[Velocity] = field(default_factory=list)
    feasible: np.ndarray = None
    objective_points: np.ndarray = None  # rows for feasible candidates only
    fitness: np.ndarray = None
    chosen: Optional[int] = None  # index into candidates
    chosen_fitness: Optional[float] = None
    chosen_point: Optional[np.ndarray] = None
    active: list = field(default_factory=list)
    stuck: bool = False
    goal_used: Optional[Pose] = None


def objective_matrix(poses: np.ndarray, world: WorldState, selected, trad: np.ndarray,
                     zones: ProxemicZones, social_goal=None) -> np.ndarray:
    """Columns ``[cost, w1*obj1, ...]`` for the feasible rollouts.

    The per-cycle archive rescales every column by its own min and max, so a
    positive weight cancels in the transform; weights act through the
    selector's drop threshold, which decides whether a column exists.
    """
    cols = [trad]
    for oid, w in selected[1:]:
        if oid is ObjectiveId.PERSONAL_SPACE:
            xy = np.array([[h.pose.x, h.pose.y] for h in world.humans]).reshape(-1, 2)
            cols.append(w * obj.personal_space_costs(poses, xy, zones.gaussian_sigma))
        elif oid is ObjectiveId.RIGHT_SIDE:
            cols.append(w * obj.right_side_costs(poses, world.corridor_axis))
        elif oid is ObjectiveId.SOCIAL_GOAL_DISTANCE:
            cols.append(w * obj.social_goal_costs(poses, social_goal.pose))
    return np.column_stack(cols)


def plan_step(world: WorldState, posterior, social_goal=None,
              cfg: PlannerConfig = PlannerConfig(),
              weights: TraditionalWeights = TraditionalWeights(),
              zones: ProxemicZones = ProxemicZones(), global_path=None,
              activation=None, collision_grid: Optional[OccupancyGrid] = None,
              mode: str = "paccet"):
    """One local planning cycle; returns ``(command, diagnostics)``.

    ``mode='traditional'`` picks the argmin of the weighted-sum cost and
    ignores ``posterior``. In ``'paccet'`` mode the candidate objective
    vectors ``[cost, w1*obj1, ...]`` go through the Pareto selector.
    When the social-goal objective is active and a social goal is given,
    the traditional cost steers toward the social goal instead of the task
    goal (the caller supplies a matching ``global_path``).
    """
    if global_path is None:
        raise ValueError("plan_step requires a global path")
    spec = world.spec
    grid = collision_grid if collision_grid is not None else with_humans(
        world.grid, world.obstacles, world.humans, spec.radius)
    selected = obj.select_objectives(posterior if mode == "paccet" else None, world, activation)
    if social_goal is None:
        selected = [s for s in selected if s[0] is not ObjectiveId.SOCIAL_GOAL_DISTANCE]
    use_social = any(s[0] is ObjectiveId.SOCIAL_GOAL_DISTANCE for s in selected)
    goal = social_goal.pose if use_social else world.goal

    cands = sample_velocities(world.robot_velocity, spec, cfg)
    cmds = np.array([c.as_array() for c in cands])
    poses = rollout_batch(world.robot, cmds, cfg.steps, cfg.dt)
    path = np.array([[p.x, p.y] for p in global_path]).reshape(-1, 2)
    trad = obj.traditional_costs(poses, path, goal, grid, weights, spec.radius)
    feasible = np.isfinite(trad)
    diag = PlanDiagnostics(candidates=cands, feasible=feasible, active=selected, goal_used=goal)
    if not feasible.any():
        diag.stuck = True
        return Velocity(0.0, 0.0, 0.0), diag

    idx = np.flatnonzero(feasible)
    fposes = poses[idx]
    points = objective_matrix(fposes, world, selected, trad[idx], zones, social_goal)
    diag.objective_points = points
    if mode == "traditional":
        k = int(np.argmin(trad[idx]))
        diag.fitness = trad[idx]
    else:
        k, fit, _, _ = rank_candidates(points, trad[idx])
        diag.fitness = fit
    diag.chosen = int(idx[k])
    diag.chosen_fitness = float(diag.fitness[k])
    diag.chosen_point = points[k]
    return cands[diag.chosen], diag
