"""Social goal synthesis: the tail of a queue and an open slot in a group circle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .world import Pose

QUEUE_TAIL = "QueueTail"
O_FORMATION_SLOT = "OFormationSlot"


@dataclass(frozen=True)
class SocialGoal:
    pose: Pose
    kind: str
    provenance: dict = field(default_factory=dict, compare=False)


def _facing(frm, to) -> float:
    return math.atan2(to[1] - frm[1], to[0] - frm[0])


def queue_goal(people: Sequence, resource: Pose, spacing: float = 1.0) -> SocialGoal:
    """Place the robot ``spacing`` metres behind the last person in line.

    The line is the total-least-squares fit through the people; the resource
    sits at its head. With nobody queued the goal is ``spacing`` out from the
    resource along its facing direction.
    """
    if spacing <= 0:
        raise ValueError("spacing must be > 0")
    res = np.array([resource.x, resource.y])
    if not people:
        n = np.array([math.cos(resource.theta), math.sin(resource.theta)])
        g = res + spacing * n
        return SocialGoal(Pose(g[0], g[1], _facing(g, res)), QUEUE_TAIL,
                          {"people": 0, "spacing": spacing})

    P = np.array([[h.pose.x, h.pose.y] for h in people], dtype=float)
    c = P.mean(axis=0)
    spread = np.linalg.svd(P - c, compute_uv=False) if len(P) > 1 else np.zeros(1)
    away = c - res
    if len(P) == 1 or spread[0] < 1e-9:
        # Single person or everyone on one spot: the line runs resource -> people.
        norm = np.hypot(*away)
        u = away / norm if norm > 1e-12 else np.array([math.cos(resource.theta),
                                                       math.sin(resource.theta)])
    else:
        _, _, vt = np.linalg.svd(P - c)
        u = vt[0]
        if np.dot(away, u) < 0:
            u = -u
    proj = (P - c) @ u
    tail = c + (proj.max() + spacing) * u
    return SocialGoal(Pose(tail[0], tail[1], _facing(tail, res)), QUEUE_TAIL,
                      {"people": len(P), "direction": [float(u[0]), float(u[1])],
                       "spacing": spacing})


def _circle_center(P: np.ndarray) -> np.ndarray:
    """Algebraic least-squares circle center; centroid when ill-posed."""
    c = P.mean(axis=0)
    if len(P) < 3:
        return c
    Q = P - c
    A = np.column_stack([2.0 * Q, np.ones(len(Q))])
    b = (Q ** 2).sum(axis=1)
    if np.linalg.matrix_rank(A, tol=1e-9) < 3:
        return c
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    return c + sol[:2]


def o_formation_goal(group: Sequence, social_radius: float = 1.2) -> SocialGoal:
    """Largest angular gap on the circle the group stands on.

    Ties between equal gaps go to the lowest midpoint angle in [0, 2*pi).
    The circle radius is the mean member distance, floored at half the
    social radius so the robot never targets a point inside a tight pair.
    """
    if not group:
        raise ValueError("o_formation_goal needs at least one member")
    if len(group) == 1:
        p = group[0].pose
        g = (p.x + social_radius * math.cos(p.theta), p.y + social_radius * math.sin(p.theta))
        return SocialGoal(Pose(g[0], g[1], p.theta + math.pi), O_FORMATION_SLOT,
                          {"members": 1, "radius": social_radius})

    P = np.array([[h.pose.x, h.pose.y] for h in group], dtype=float)
    c = _circle_center(P)
    radius = max(float(np.hypot(*(P - c).T).mean()), 0.5 * social_radius)
    ang = np.sort(np.mod(np.arctan2(P[:, 1] - c[1], P[:, 0] - c[0]), 2.0 * math.pi))
    gaps = np.diff(np.append(ang, ang[0] + 2.0 * math.pi))
    mids = np.mod(ang + gaps / 2.0, 2.0 * math.pi)
    best = max(gaps)
    cand = [m for g, m in zip(gaps, mids) if g >= best - 1e-9]
    m = min(cand)
    g = c + radius * np.array([math.cos(m), math.sin(m)])
    return SocialGoal(Pose(g[0], g[1], m + math.pi), O_FORMATION_SLOT,
                      {"members": len(P), "center": [float(c[0]), float(c[1])],
                       "radius": radius})
