"""Interaction-context classification from distance-based features.

One Gaussian per context label (class-conditional model). The class density
is the standard multivariate normal, i.e. the exponent is half the squared
Mahalanobis distance. Posteriors over labels become objective weights.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .world import MAX_WALL_DISTANCE, WorldState, wrap_angle

SCHEMA_VERSION = 1
FEATURE_NAMES = ("interpersonal_distance", "relative_heading", "approach_rate",
                 "wall_distance", "goal_alignment")
N_FEATURES = len(FEATURE_NAMES)


class ContextLabel(str, Enum):
    PASSING = "Passing"
    MEETING = "Meeting"
    WALKING_TOGETHER_TOWARD = "WalkingTogetherToward"
    WALKING_TOGETHER_AWAY = "WalkingTogetherAway"
    QUEUE_WAITING = "QueueWaiting"
    GROUP_JOINING = "GroupJoining"


LABELS = tuple(ContextLabel)


class NoHumans(Exception):
    """Raised when there is nobody to classify an interaction with."""


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    interpersonal_distance: float
    relative_heading: float
    approach_rate: float
    wall_distance: float
    goal_alignment: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES])


def _bearing_gap(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


def _nearest_human(world: WorldState):
    d = [math.hypot(h.pose.x - world.robot.x, h.pose.y - world.robot.y) for h in world.humans]
    i = int(np.argmin(d))
    return i, d[i]


def extract_features(world: WorldState, previous: Optional[WorldState] = None) -> FeatureVector:
    if not world.humans:
        raise NoHumans()
    i, dist = _nearest_human(world)
    human = world.humans[i]
    r = world.robot

    rate = 0.0
    if previous is not None and len(previous.humans) > i and world.t > previous.t:
        ph = previous.humans[i]
        prev_d = math.hypot(ph.pose.x - previous.robot.x, ph.pose.y - previous.robot.y)
        rate = (dist - prev_d) / (world.t - previous.t)

    to_goal = math.atan2(world.goal.y - r.y, world.goal.x - r.x)
    to_human = math.atan2(human.pose.y - r.y, human.pose.x - r.x)
    return FeatureVector(
        interpersonal_distance=dist,
        relative_heading=_bearing_gap(r.theta, human.pose.theta),
        approach_rate=rate,
        wall_distance=world.grid.wall_distance(r.x, r.y),
        goal_alignment=_bearing_gap(to_goal, to_human),
    )


@dataclass(frozen=True)
class GaussianComponent:
    mean: np.ndarray
    covariance: np.ndarray
    prior: float

    def log_density(self, w) -> np.ndarray:
        w = np.atleast_2d(np.asarray(w, dtype=float))
        n = self.mean.shape[0]
        try:
            L = np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError("covariance is not positive definite") from None
        z = np.linalg.solve(L, (w - self.mean).T)
        with np.errstate(over="ignore"):  # a far-off query just has zero density
            half_mahal = 0.5 * np.sum(z * z, axis=0)
        log_det = 2.0 * np.sum(np.log(np.diag(L)))
        return -0.5 * n * math.log(2.0 * math.pi) - 0.5 * log_det - half_mahal


@dataclass(frozen=True)
class ContextModel:
    components: Dict[ContextLabel, GaussianComponent]
    regularization: float = 1e-6

    def __post_init__(self):
        if not self.components:
            raise ValueError("context model needs at least one label")
        total = sum(c.prior for c in self.components.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"component priors sum to {total}, not 1")


def fit_context_model(features, labels: Sequence, reg: float = 1e-6,
                      seed: int = 0) -> ContextModel:
    """Per-label maximum-likelihood Gaussians with ``reg * I`` added.

    Only labels that occur in ``labels`` get a component (the bundled model
    has all six). ``seed`` is accepted for interface stability with multi-component fits;
    the single-component fit is closed form and uses no randomness.
    """
    if reg <= 0:
        raise TrainingError("regularization must be > 0")
    X = np.asarray(features, dtype=float)
    y = [ContextLabel(lab) for lab in labels]
    n = X.shape[1]
    if X.ndim != 2 or len(X) != len(y):
        raise TrainingError("features must be (samples, n) with one label per row")
    comps = {}
    for lab in [lab for lab in LABELS if lab in y]:
        Xk = X[np.array([v is lab for v in y], dtype=bool)]
        if len(Xk) < n + 1:
            raise TrainingError(f"label {lab.value} has {len(Xk)} samples, needs >= {n + 1}")
        mu = Xk.mean(axis=0)
        diff = Xk - mu
        cov = diff.T @ diff / len(Xk) + reg * np.eye(n)
        comps[lab] = GaussianComponent(mu, cov, len(Xk) / len(X))
    return ContextModel(comps, reg)


def class_density(model: ContextModel, label, w) -> float:
    comp = model.components[ContextLabel(label)]
    arr = w.as_array() if isinstance(w, FeatureVector) else np.asarray(w, dtype=float)
    return float(np.exp(comp.log_density(arr)[0]))


@dataclass(frozen=True)
class Classification:
    label: ContextLabel
    posterior: Dict[ContextLabel, float]
    low_confidence: bool = False


def classify(model: ContextModel, w) -> Classification:
    arr = w.as_array() if isinstance(w, FeatureVector) else np.asarray(w, dtype=float)
    labs = list(model.components)
    log_dens = np.array([model.components[k].log_density(arr)[0] for k in labs])
    if not np.any(np.exp(log_dens) > 0.0):
        uniform = 1.0 / len(labs)
        return Classification(labs[0], {k: uniform for k in labs}, low_confidence=True)
    log_joint = log_dens + np.log([model.components[k].prior for k in labs])
    post = np.exp(log_joint - logsumexp(log_joint))
    post /= post.sum()
    best = int(np.argmax(post))
    return Classification(labs[best], {k: float(p) for k, p in zip(labs, post)})


# -- serialization -----------------------------------------------------------

def model_to_dict(model: ContextModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "features": list(FEATURE_NAMES),
        "regularization": model.regularization,
        "components": {
            lab.value: {
                "mean": [float(v) for v in c.mean],
                "covariance": [float(v) for v in c.covariance.ravel()],
                "prior": float(c.prior),
            }
            for lab, c in model.components.items()
        },
    }


def model_from_dict(data: dict) -> ContextModel:
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported context model schema {data.get('schema_version')!r}")
    comps = {}
    for name, c in data["components"].items():
        mean = np.array(c["mean"], dtype=float)
        cov = np.array(c["covariance"], dtype=float).reshape(len(mean), len(mean))
        comps[ContextLabel(name)] = GaussianComponent(mean, cov, float(c["prior"]))
    return ContextModel(comps, float(data["regularization"]))


def save_model(model: ContextModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> ContextModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def bundled_model() -> ContextModel:
    return load_model(resources.files("socialnav") / "data" / "context_model.json")


def write_dataset(path, features, labels) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(list(FEATURE_NAMES) + ["label"])
        for row, lab in zip(np.asarray(features), labels):
            wr.writerow([repr(float(v)) for v in row] + [ContextLabel(lab).value])


def read_dataset(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise TrainingError(f"{path}: empty dataset")
    missing = [n for n in FEATURE_NAMES + ("label",) if n not in rows[0]]
    if missing:
        raise TrainingError(f"{path}: missing columns {missing}")
    X = np.array([[float(r[n]) for n in FEATURE_NAMES] for r in rows])
    y = [ContextLabel(r["label"]) for r in rows]
    return X, y


# -- synthetic dataset ---------------------------------------------------------

# Class prototypes, (mean, std) per feature in FEATURE_NAMES order.
# Passing/Meeting: oncoming person (heading gap near pi), closing in; a
#   passer is offset from the goal bearing, a meeting partner sits on it and
#   the pair slows down close together.
# WalkingTogether*: side by side at ~1 m, same heading, no closing speed;
#   the partner is beside (toward) or slightly behind (away) the goal bearing.
# QueueWaiting: people ahead facing the same way, standing near a wall/desk.
# GroupJoining: open floor, several metres out, approaching slowly.
PROTOTYPES = {
    ContextLabel.PASSING: [(4.0, 1.6), (2.9, 0.25), (-0.7, 0.3), (2.2, 0.6), (0.45, 0.35)],
    ContextLabel.MEETING: [(1.6, 0.4), (2.9, 0.25), (-0.15, 0.12), (2.2, 0.6), (0.05, 0.05)],
    ContextLabel.WALKING_TOGETHER_TOWARD: [(1.0, 0.2), (0.15, 0.1), (0.0, 0.06), (1.5, 0.5), (1.45, 0.25)],
    ContextLabel.WALKING_TOGETHER_AWAY: [(1.0, 0.2), (0.15, 0.1), (0.0, 0.06), (1.5, 0.5), (2.4, 0.25)],
    ContextLabel.QUEUE_WAITING: [(2.0, 0.9), (0.5, 0.4), (-0.35, 0.3), (1.2, 0.5), (0.35, 0.3)],
    ContextLabel.GROUP_JOINING: [(3.0, 1.2), (0.8, 0.6), (-0.4, 0.3), (4.6, 0.4), (0.6, 0.5)],
}


def generate_dataset(n_per_label: int = 500, seed: int = 0):
    """Labeled synthetic features drawn from :data:`PROTOTYPES`.

    Distances are clipped at 0 (wall distance also at its saturation value),
    angles to [0, pi]. Returns ``(X, labels)`` with rows grouped by label.
    """
    rng = np.random.default_rng(seed)
    X, y = [], []
    for lab in LABELS:
        proto = np.array(PROTOTYPES[lab])
        s = rng.normal(proto[:, 0], proto[:, 1], size=(n_per_label, N_FEATURES))
        s[:, 0] = np.maximum(s[:, 0], 0.0)
        s[:, 1] = np.clip(s[:, 1], 0.0, math.pi)
        s[:, 3] = np.clip(s[:, 3], 0.0, MAX_WALL_DISTANCE)
        s[:, 4] = np.clip(s[:, 4], 0.0, math.pi)
        X.append(s)
        y.extend([lab] * n_per_label)
    return np.vstack(X), y


def split_holdout(X, y, fraction: float = 0.3, seed: int = 0):
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(X))
    cut = int(round(len(X) * (1.0 - fraction)))
    tr, te = np.sort(idx[:cut]), np.sort(idx[cut:])
    y = list(y)
    return X[tr], [y[i] for i in tr], X[te], [y[i] for i in te]


def accuracy(model: ContextModel, X, y) -> float:
    hits = sum(classify(model, x).label == ContextLabel(lab) for x, lab in zip(X, y))
    return hits / len(y)
