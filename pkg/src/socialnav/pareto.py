"""Non-dominated archive and the Pareto concavity-elimination fitness.

All objectives are minimized. The fitness of a point ``p`` relative to an
archive is ``1 / t_dom`` where ``t_dom`` is the factor by which the
normalized point must be scaled along its ray from the utopia point to touch
the boundary of the region the archive dominates. Consequences:

* ``fitness >= 1`` exactly when some archived point weakly dominates ``p``
  in normalized space, ``fitness < 1`` when ``p`` pushes the front outward;
* if ``a`` dominates ``b`` then ``fitness(a) <= fitness(b)``.

When the archive is built from the candidate set itself every front member
scores exactly 1, concave stretches included; :func:`rank_candidates` then
separates them by distance from the utopia corner.
"""
from __future__ import annotations

import numpy as np

EPS = 1e-9


def dominates(a, b) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


class ParetoArchive:
    """Mutually non-dominated point set with running normalization bounds."""

    def __init__(self, dim: int, lower=None, upper=None):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        self.points = np.empty((0, dim))
        self.lower = None if lower is None else np.asarray(lower, dtype=float).copy()
        self.upper = None if upper is None else np.asarray(upper, dtype=float).copy()

    @classmethod
    def from_points(cls, points, front=None) -> "ParetoArchive":
        """Same result as inserting every row in order, without the Python loop."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or not len(pts):
            raise ValueError("from_points needs a non-empty 2-D array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("objective values must be finite")
        arc = cls(pts.shape[1], pts.min(axis=0), pts.max(axis=0))
        keep = front_mask(pts) if front is None else front
        _, first = np.unique(pts[keep], axis=0, return_index=True)
        arc.points = pts[keep][np.sort(first)]
        return arc

    def __len__(self):
        return len(self.points)

    def insert(self, p) -> bool:
        """Insert ``p``; returns whether it joined the front."""
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"expected a point of dimension {self.dim}, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("objective values must be finite")
        if self.lower is None:
            self.lower, self.upper = p.copy(), p.copy()
        else:
            np.minimum(self.lower, p, out=self.lower)
            np.maximum(self.upper, p, out=self.upper)
        pts = self.points
        if len(pts) and np.any(np.all(pts <= p, axis=1)):
            return False
        if len(pts):
            dominated = np.all(p <= pts, axis=1) & np.any(p < pts, axis=1)
            pts = pts[~dominated]
        self.points = np.vstack([pts, p[None, :]])
        return True

    def normalize(self, p) -> np.ndarray:
        if self.lower is None:
            raise ValueError("archive bounds are not initialized")
        p = np.asarray(p, dtype=float)
        return np.maximum((p - self.lower) / (self.upper - self.lower + EPS), 0.0)

    def fitness(self, p) -> np.ndarray:
        """Fitness of one point (shape ``(d,)``) or many (shape ``(n, d)``)."""
        if not len(self.points):
            raise ValueError("fitness requires a non-empty archive")
        p = np.asarray(p, dtype=float)
        single = p.ndim == 1
        P = np.maximum(self.normalize(np.atleast_2d(p)), EPS)
        A = np.maximum(self.normalize(self.points), EPS)
        out = np.empty(len(P))
        step = max(1, 2_000_000 // max(1, A.size))
        for s in range(0, len(P), step):
            ratios = A[None, :, :] / P[s:s + step, None, :]
            out[s:s + step] = 1.0 / ratios.max(axis=2).min(axis=1)
        return out[0] if single else out


def archive_insert(archive: ParetoArchive, p) -> ParetoArchive:
    archive.insert(p)
    return archive


def normalize(archive: ParetoArchive, p) -> np.ndarray:
    return archive.normalize(p)


def paccet_fitness(archive: ParetoArchive, p):
    return archive.fitness(p)


def non_dominated_mask(points) -> np.ndarray:
    """Brute-force O(n^2) non-domination test."""
    pts = np.asarray(points, dtype=float)
    mask = np.ones(len(pts), dtype=bool)
    for i in range(len(pts)):
        le = np.all(pts <= pts[i], axis=1)
        lt = np.any(pts < pts[i], axis=1)
        mask[i] = not np.any(le & lt)
    return mask


def front_mask(points) -> np.ndarray:
    """Rows not strictly dominated by any other row.

    Walks the points in lexicographic order: the first survivor cannot be
    dominated by anything left, so it joins the front and everything it
    dominates is discarded. Cost is O(n * front size) and involves no
    arithmetic on the values.
    """
    pts = np.asarray(points, dtype=float)
    mask = np.zeros(len(pts), dtype=bool)
    if pts.ndim != 2 or not len(pts):
        return mask
    alive = np.lexsort(pts.T[::-1])
    while len(alive):
        i = alive[0]
        mask[i] = True
        rest = pts[alive[1:]]
        beaten = np.all(pts[i] <= rest, axis=1) & np.any(pts[i] < rest, axis=1)
        alive = alive[1:][~beaten]
    return mask


def rank_candidates(candidates, tie_break_cost):
    """Score a candidate set against its own front.

    Returns ``(index, fitness, knee, archive)``. Every front member has
    fitness exactly 1 under a self-built archive, so among equal fitness the
    point nearest the utopia corner in normalized space wins (the knee), then
    the lower ``tie_break_cost``, then the lower index. Dominated candidates
    are never returned.
    """
    pts = np.asarray(candidates, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("select_best requires a non-empty 2-D candidate array")
    tie = np.asarray(tie_break_cost, dtype=float)
    if tie.shape != (len(pts),):
        raise ValueError("tie_break_cost must have one entry per candidate")
    in_front = front_mask(pts)
    archive = ParetoArchive.from_points(pts, in_front)
    fit = archive.fitness(pts)
    knee = np.linalg.norm(np.maximum(archive.normalize(pts), EPS), axis=1)
    idx = np.flatnonzero(in_front)
    order = np.lexsort((idx, tie[idx], knee[idx], fit[idx]))
    return int(idx[order[0]]), fit, knee, archive


def select_best(candidates, tie_break_cost) -> int:
    return rank_candidates(candidates, tie_break_cost)[0]


def weighted_sum_select(candidates, weights) -> int:
    pts = np.asarray(candidates, dtype=float)
    return int(np.argmin(pts @ np.asarray(weights, dtype=float)))
