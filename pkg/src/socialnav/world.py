"""Geometric world representation: poses, robot, humans, obstacles and the
occupancy grid the planners collide against.

Humans are deliberately never rasterized by :func:`rasterize`. Collision
checking against human bodies goes through :func:`with_humans`, which
builds a per-cycle overlay without touching the static grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy import ndimage

LETHAL = math.inf
INFEASIBLE = math.inf

# Body radius used for collision overlay and same-footprint comparisons.
HUMAN_RADIUS = 0.2
# wall_distance saturates here when the map has no lethal cells nearby.
MAX_WALL_DISTANCE = 5.0


class ConfigError(ValueError):
    """Invalid scenario or robot configuration."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


def wrap_angles(a: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_angle`; angles already in range pass through unchanged."""
    a = np.asarray(a, dtype=float)
    w = np.remainder(a + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w <= -np.pi, w + 2.0 * np.pi, w)
    return np.where((a > -np.pi) & (a <= np.pi), a, w)


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class Velocity:
    """Body-frame command: forward ``vx``, lateral ``vy``, yaw rate ``vtheta``."""

    vx: float = 0.0
    vy: float = 0.0
    vtheta: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vtheta])


@dataclass(frozen=True)
class RobotSpec:
    radius: float = 0.3
    drive: str = "differential"
    v_max: float = 1.0
    v_min: float = 0.0
    vtheta_max: float = 1.0
    accel_linear: float = 1.0
    accel_angular: float = 2.0
    goal_tolerance: float = 0.2

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError("robot.radius must be > 0")
        if self.v_max <= 0:
            raise ConfigError("robot.v_max must be > 0")
        if self.v_min > self.v_max:
            raise ConfigError("robot.v_min must not exceed robot.v_max")
        if self.goal_tolerance <= 0:
            raise ConfigError("robot.goal_tolerance must be > 0")
        if self.drive not in ("holonomic", "differential"):
            raise ConfigError("robot.drive must be 'holonomic' or 'differential'")
        if self.vtheta_max < 0 or self.accel_linear < 0 or self.accel_angular < 0:
            raise ConfigError("robot limits must be non-negative")

    @property
    def holonomic(self) -> bool:
        return self.drive == "holonomic"


@dataclass(frozen=True)
class Human:
    pose: Pose
    velocity: Optional[tuple] = None  # world frame (vx, vy)
    group_id: Optional[int] = None

    def advanced(self, dt: float) -> "Human":
        if not self.velocity:
            return self
        vx, vy = self.velocity
        p = Pose(self.pose.x + vx * dt, self.pose.y + vy * dt, self.pose.theta)
        return Human(p, self.velocity, self.group_id)


@dataclass(frozen=True)
class Circle:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError("circle radius must be > 0")

    def distance(self, x, y):
        """Distance from point(s) to the circle boundary, 0 inside."""
        d = np.hypot(np.asarray(x) - self.center[0], np.asarray(y) - self.center[1])
        return np.maximum(d - self.radius, 0.0)

    def overlaps_cells(self, x0, y0, x1, y1):
        cx = np.clip(self.center[0], x0, x1)
        cy = np.clip(self.center[1], y0, y1)
        return np.hypot(cx - self.center[0], cy - self.center[1]) < self.radius


@dataclass(frozen=True)
class Rect:
    min_corner: tuple
    max_corner: tuple

    def __post_init__(self):
        if not (self.min_corner[0] < self.max_corner[0] and self.min_corner[1] < self.max_corner[1]):
            raise ConfigError("rectangle min corner must be < max corner per axis")

    def distance(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        dx = np.maximum(np.maximum(self.min_corner[0] - x, x - self.max_corner[0]), 0.0)
        dy = np.maximum(np.maximum(self.min_corner[1] - y, y - self.max_corner[1]), 0.0)
        return np.hypot(dx, dy)

    def overlaps_cells(self, x0, y0, x1, y1):
        return ((x1 > self.min_corner[0]) & (x0 < self.max_corner[0])
                & (y1 > self.min_corner[1]) & (y0 < self.max_corner[1]))


StaticObstacle = Union[Circle, Rect]


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Row-major cost grid; ``cells[row, col]`` with rows along +y.

    Cell ``(row, col)`` covers ``[ox + col*res, ox + (col+1)*res) x
    [oy + row*res, oy + (row+1)*res)``. Lethal cells hold ``LETHAL``.
    """

    resolution: float
    width: int
    height: int
    origin: Pose
    cells: np.ndarray

    def __post_init__(self):
        self.cells.setflags(write=False)

    @property
    def lethal(self) -> np.ndarray:
        return np.isinf(self.cells)

    def cell_of(self, x, y):
        col = np.floor((np.asarray(x) - self.origin.x) / self.resolution).astype(int)
        row = np.floor((np.asarray(y) - self.origin.y) / self.resolution).astype(int)
        return row, col

    def cell_center(self, row, col):
        return (self.origin.x + (np.asarray(col) + 0.5) * self.resolution,
                self.origin.y + (np.asarray(row) + 0.5) * self.resolution)

    def in_bounds(self, x, y) -> bool:
        row, col = self.cell_of(x, y)
        return bool(0 <= row < self.height and 0 <= col < self.width)

    @property
    def lethal_distance(self) -> np.ndarray:
        """Distance (m) from every cell center to the nearest lethal cell center."""
        cached = self.__dict__.get("_lethal_distance")
        if cached is None:
            lethal = self.lethal
            if lethal.any():
                cached = ndimage.distance_transform_edt(~lethal) * self.resolution
            else:
                cached = np.full(self.cells.shape, np.inf)
            object.__setattr__(self, "_lethal_distance", cached)
        return cached

    @property
    def free_distance(self) -> np.ndarray:
        """Distance (m) from every cell center to the nearest cell with non-zero cost."""
        cached = self.__dict__.get("_free_distance")
        if cached is None:
            busy = self.cells != 0.0
            if busy.any():
                cached = ndimage.distance_transform_edt(~busy) * self.resolution
            else:
                cached = np.full(self.cells.shape, np.inf)
            object.__setattr__(self, "_free_distance", cached)
        return cached

    def wall_distance(self, x: float, y: float) -> float:
        if not self.in_bounds(x, y):
            return 0.0
        row, col = self.cell_of(x, y)
        return float(min(self.lethal_distance[row, col], MAX_WALL_DISTANCE))


@dataclass(frozen=True)
class CorridorAxis:
    point: tuple
    direction: tuple
    half_width: float

    def __post_init__(self):
        n = math.hypot(*self.direction)
        if n == 0:
            raise ConfigError("corridor_axis.direction must be non-zero")
        if self.half_width <= 0:
            raise ConfigError("corridor_axis.half_width must be > 0")
        object.__setattr__(self, "direction", (self.direction[0] / n, self.direction[1] / n))


@dataclass(frozen=True)
class WorldState:
    robot: Pose
    robot_velocity: Velocity
    spec: RobotSpec
    humans: tuple
    obstacles: tuple
    grid: OccupancyGrid
    goal: Pose
    corridor_axis: Optional[CorridorAxis] = None
    resource: Optional[Pose] = None
    t: float = 0.0


def _grid_from_obstacles(width_m, height_m, resolution, obstacles, inflation_radius):
    if resolution <= 0:
        raise ConfigError("world.resolution_m must be > 0")
    if width_m <= 0 or height_m <= 0:
        raise ConfigError("world bounds must be positive")
    width = int(math.ceil(width_m / resolution - 1e-9))
    height = int(math.ceil(height_m / resolution - 1e-9))
    cols = np.arange(width)
    rows = np.arange(height)
    x0 = (cols * resolution)[None, :]
    x1 = ((cols + 1) * resolution)[None, :]
    y0 = (rows * resolution)[:, None]
    y1 = ((rows + 1) * resolution)[:, None]
    lethal = np.zeros((height, width), dtype=bool)
    for obs in obstacles:
        lethal |= obs.overlaps_cells(x0, y0, x1, y1)
    cells = np.zeros((height, width))
    if lethal.any():
        dist = ndimage.distance_transform_edt(~lethal) * resolution
        cells = np.clip(1.0 - dist / inflation_radius, 0.0, 1.0)
        cells[lethal] = LETHAL
    return OccupancyGrid(resolution, width, height, Pose(0.0, 0.0, 0.0), cells)


def rasterize(scenario) -> OccupancyGrid:
    """Rasterize a scenario's static obstacles with linear inflation.

    Inflation decays from 1 at a lethal cell to 0 at one robot radius away.
    Humans are ignored.
    """
    w = scenario.world
    return _grid_from_obstacles(w.width_m, w.height_m, w.resolution_m,
                                scenario.obstacles, scenario.robot_spec.radius)


def human_footprints(humans: Sequence[Human], radius: float = HUMAN_RADIUS):
    return tuple(Circle((h.pose.x, h.pose.y), radius) for h in humans)


def with_humans(grid: OccupancyGrid, obstacles: Sequence[StaticObstacle],
                humans: Sequence[Human], inflation_radius: float) -> OccupancyGrid:
    """Collision grid: static obstacles plus human bodies as circles.

    Used by both planners so that a human is at least an obstacle; the social
    layer on top of this is what distinguishes people from objects.
    """
    if not humans:
        return grid
    return _grid_from_obstacles(grid.width * grid.resolution, grid.height * grid.resolution,
                                grid.resolution, tuple(obstacles) + human_footprints(humans),
                                inflation_radius)


@lru_cache(maxsize=32)
def _footprint_offsets(resolution: float, radius: float):
    reach = int(math.ceil(radius / resolution)) + 1
    d = np.arange(-reach, reach + 1)
    dr, dc = np.meshgrid(d, d, indexing="ij")
    # Any cell whose center can fall within radius of a pose inside the center cell.
    keep = np.hypot(dr, dc) * resolution <= radius + resolution * math.sqrt(0.5) + 1e-12
    return dr[keep], dc[keep]


def occupancy_costs(grid: OccupancyGrid, xs, ys, footprint_radius: float) -> np.ndarray:
    """Vectorized :func:`occupancy_cost` over arrays of positions."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    shape = xs.shape
    xs = xs.ravel()
    ys = ys.ravel()
    row, col = grid.cell_of(xs, ys)
    pose_valid = (row >= 0) & (row < grid.height) & (col >= 0) & (col < grid.width)
    out = np.full(xs.shape, INFEASIBLE)
    # Footprint cells lie within radius + half a cell diagonal of the containing
    # cell's center; if no costed cell is that close the answer is exactly 0.
    reach = footprint_radius + grid.resolution * math.sqrt(0.5) + 1e-9
    far = np.zeros(xs.shape, dtype=bool)
    r, c = row[pose_valid], col[pose_valid]
    # off-map cells count as lethal, so the map edge must be out of reach too
    edge = np.minimum(np.minimum(c, grid.width - 1 - c), np.minimum(r, grid.height - 1 - r))
    far[pose_valid] = ((grid.free_distance[r, c] > reach)
                       & ((edge + 0.5) * grid.resolution > reach))
    out[far] = 0.0
    near = np.flatnonzero(pose_valid & ~far)
    if len(near):
        px, py, row, col = xs[near], ys[near], row[near], col[near]
        dr, dc = _footprint_offsets(grid.resolution, footprint_radius)
        rr = row[:, None] + dr[None, :]
        cc = col[:, None] + dc[None, :]
        cx, cy = grid.cell_center(rr, cc)
        inside = np.hypot(cx - px[:, None], cy - py[:, None]) <= footprint_radius
        inside |= (dr == 0)[None, :] & (dc == 0)[None, :]
        valid = (rr >= 0) & (rr < grid.height) & (cc >= 0) & (cc < grid.width)
        vals = np.where(valid, grid.cells[np.clip(rr, 0, grid.height - 1),
                                          np.clip(cc, 0, grid.width - 1)], LETHAL)
        out[near] = np.where(inside, vals, 0.0).max(axis=1)
    return out.reshape(shape)


def occupancy_cost(grid: OccupancyGrid, pose: Pose, footprint_radius: float) -> float:
    """Max inflated cost under a circular footprint, or ``INFEASIBLE``.

    Cells outside the map count as lethal.
    """
    return float(occupancy_costs(grid, [pose.x], [pose.y], footprint_radius)[0])


def min_human_clearance(pose: Pose, humans: Sequence[Human]) -> float:
    if not humans:
        return math.inf
    return min(math.hypot(pose.x - h.pose.x, pose.y - h.pose.y) for h in humans)


def min_obstacle_clearance(pose: Pose, obstacles: Sequence[StaticObstacle]) -> float:
    """Robot-center to nearest obstacle surface distance."""
    if not obstacles:
        return math.inf
    return float(min(obs.distance(pose.x, pose.y) for obs in obstacles))
