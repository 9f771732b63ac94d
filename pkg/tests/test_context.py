import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socialnav import context as ctx
from socialnav.context import (ContextLabel, ContextModel, FeatureVector, GaussianComponent,
                               NoHumans, TrainingError, class_density, classify,
                               extract_features, fit_context_model)
from socialnav.world import Human, OccupancyGrid, Pose, RobotSpec, Velocity, WorldState

P, M = ContextLabel.PASSING, ContextLabel.MEETING


def world(robot, humans, t=0.0, goal=Pose(5, 0)):
    grid = OccupancyGrid(0.1, 100, 100, Pose(-5, -5), np.zeros((100, 100)))
    return WorldState(robot, Velocity(), RobotSpec(), tuple(humans), (), grid, goal, t=t)


def model(comps):
    return ContextModel({k: GaussianComponent(np.atleast_1d(np.asarray(m, float)),
                                              np.atleast_2d(np.asarray(c, float)), p)
                         for k, (m, c, p) in comps.items()})


def test_density_closed_forms():
    m2 = model({P: ([0, 0], np.eye(2), 1.0)})
    assert class_density(m2, P, [0, 0]) == pytest.approx(1 / (2 * math.pi), abs=1e-12)
    m1 = model({P: ([3.0], [[1.0]], 1.0)})
    assert class_density(m1, P, [3.0]) == pytest.approx(0.3989422804014327, abs=1e-12)
    assert class_density(m1, P, [4.0]) == pytest.approx(0.24197072451914337, abs=1e-12)


def test_density_general_oracle():
    rng = np.random.default_rng(1)
    A = rng.normal(size=(3, 3))
    cov = A @ A.T + 0.5 * np.eye(3)
    mu = rng.normal(size=3)
    m = model({P: (mu, cov, 1.0)})
    w = rng.normal(size=3)
    d = w - mu
    expect = math.exp(-0.5 * d @ np.linalg.solve(cov, d)) / math.sqrt(
        (2 * math.pi) ** 3 * np.linalg.det(cov))
    assert class_density(m, P, w) == pytest.approx(expect, rel=1e-10)


@pytest.mark.parametrize("n", [1, 2])
def test_density_integrates_to_one(n):
    rng = np.random.default_rng(7)
    cov = np.diag([0.5, 2.0][:n])
    mu = np.array([1.0, -1.0][:n])
    m = model({P: (mu, cov, 1.0)})
    half = 6 * np.sqrt(np.diag(cov))
    pts = rng.uniform(mu - half, mu + half, size=(200_000, n))
    dens = np.exp(m.components[P].log_density(pts))
    assert dens.mean() * np.prod(2 * half) == pytest.approx(1.0, abs=0.02)


def test_classify_symmetric_and_underflow():
    m = model({P: ([-1.0], [[1.0]], 0.5), M: ([1.0], [[1.0]], 0.5)})
    cls = classify(m, [0.0])
    assert cls.posterior[P] == pytest.approx(0.5) and cls.posterior[M] == pytest.approx(0.5)
    far = classify(m, [1e160])
    assert far.low_confidence
    assert far.posterior == {P: 0.5, M: 0.5}


@given(st.lists(st.floats(-20, 20), min_size=5, max_size=5))
def test_posterior_normalized(w):
    post = classify(ctx.bundled_model(), w).posterior
    assert sum(post.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(0.0 <= p <= 1.0 for p in post.values())


def test_classify_at_class_means():
    m = ctx.bundled_model()
    for lab, comp in m.components.items():
        cls = classify(m, comp.mean)
        assert cls.label == lab
        assert cls.posterior[lab] > 0.9


def test_fit_examples():
    X = np.array([[2.0], [2.0], [5.0], [5.0]])
    m = fit_context_model(X, [P, P, M, M], reg=1e-3)
    assert m.components[P].covariance.ravel() == pytest.approx([1e-3])
    assert m.components[P].mean == pytest.approx([2.0])

    labs = [ContextLabel.PASSING, ContextLabel.MEETING, ContextLabel.WALKING_TOGETHER_TOWARD,
            ContextLabel.WALKING_TOGETHER_AWAY]
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 2))
    m = fit_context_model(X, [labs[i % 4] for i in range(40)])
    assert [c.prior for c in m.components.values()] == [0.25] * 4


def test_fit_errors():
    with pytest.raises(TrainingError, match="Meeting"):
        fit_context_model(np.zeros((5, 2)), [P, P, P, M, M])
    with pytest.raises(TrainingError):
        fit_context_model(np.zeros((4, 1)), [P, P, M, M], reg=0.0)


def test_fit_deterministic_and_spd():
    X, y = ctx.generate_dataset(60, seed=3)
    a = fit_context_model(X, y)
    b = fit_context_model(X, y)
    assert ctx.model_to_dict(a) == ctx.model_to_dict(b)
    for comp in a.components.values():
        assert np.all(np.linalg.eigvalsh(comp.covariance) > 0)
        assert np.array_equal(comp.covariance, comp.covariance.T)


def test_affine_reparameterization_keeps_labels():
    X, y = ctx.generate_dataset(80, seed=5)
    rng = np.random.default_rng(2)
    A = np.diag([2.0, 0.5, 3.0, 1.5, 0.7]) @ np.linalg.qr(rng.normal(size=(5, 5)))[0]
    b = rng.normal(size=5)
    m0 = fit_context_model(X, y)
    m1 = fit_context_model(X @ A.T + b, y)
    Q = rng.normal(ctx.generate_dataset(1, 1)[0].mean(axis=0), 1.0, size=(200, 5))
    same = [classify(m0, q).label == classify(m1, A @ q + b).label for q in Q]
    assert all(same)


def test_extract_features_examples():
    w = world(Pose(0, 0, 0), [Human(Pose(2, 0, math.pi))])
    f = extract_features(w)
    assert f.interpersonal_distance == pytest.approx(2.0)
    assert f.relative_heading == pytest.approx(math.pi)
    assert f.approach_rate == 0.0
    assert f.goal_alignment == pytest.approx(0.0)
    assert f.wall_distance == 5.0

    prev = world(Pose(0, 0, 0), [Human(Pose(2.0, 0, math.pi))], t=0.0)
    cur = world(Pose(0, 0, 0), [Human(Pose(1.8, 0, math.pi))], t=0.1)
    assert extract_features(cur, prev).approach_rate == pytest.approx(-2.0)

    with pytest.raises(NoHumans):
        extract_features(world(Pose(0, 0), []))


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4))
def test_feature_ranges(x, y, th, hth):
    f = extract_features(world(Pose(x, y, th), [Human(Pose(1.0, 1.0, hth))]))
    assert f.interpersonal_distance >= 0 and f.wall_distance >= 0
    assert 0 <= f.relative_heading <= math.pi
    assert 0 <= f.goal_alignment <= math.pi


def test_model_roundtrip(tmp_path):
    X, y = ctx.generate_dataset(30, seed=1)
    m = fit_context_model(X, y)
    p = tmp_path / "m.json"
    ctx.save_model(m, p)
    back = ctx.load_model(p)
    assert ctx.model_to_dict(back) == ctx.model_to_dict(m)
    with pytest.raises(ValueError):
        ctx.model_from_dict({"schema_version": 99})


def test_dataset_roundtrip(tmp_path):
    X, y = ctx.generate_dataset(10, seed=2)
    p = tmp_path / "d.csv"
    ctx.write_dataset(p, X, y)
    X2, y2 = ctx.read_dataset(p)
    assert np.array_equal(X, X2) and y == y2


def test_bundled_model_is_reproducible():
    X, y = ctx.generate_dataset(500, seed=0)
    fresh = ctx.model_from_dict(ctx.model_to_dict(fit_context_model(X, y)))
    assert ctx.model_to_dict(fresh) == ctx.model_to_dict(ctx.bundled_model())


def test_synthetic_features_respect_ranges():
    X, _ = ctx.generate_dataset(200, seed=4)
    assert np.all(X[:, [0, 3]] >= 0)
    assert np.all((X[:, [1, 4]] >= 0) & (X[:, [1, 4]] <= math.pi))


def test_feature_vector_order():
    f = FeatureVector(1, 2, 3, 4, 5)
    assert list(f.as_array()) == [1, 2, 3, 4, 5]
