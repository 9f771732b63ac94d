import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from socialnav.context import LABELS, ContextLabel
from socialnav.objectives import (DEFAULT_ACTIVATION, ObjectiveId, ProxemicZones,
                                  TraditionalWeights, parse_activation, personal_space_cost,
                                  right_side_cost, select_objectives, social_goal_cost,
                                  traditional_cost)
from socialnav.world import INFEASIBLE, ConfigError, CorridorAxis, Human, OccupancyGrid, Pose

O = ObjectiveId


def grid(value=0.0):
    return OccupancyGrid(0.1, 100, 100, Pose(-5, -5), np.full((100, 100), value))


def traj(*poses):
    return np.array(poses, dtype=float)


def test_traditional_cost_zero_at_goal():
    t = traj((0, 0, 0), (1, 0, 0))
    assert traditional_cost(t, [(0, 0), (1, 0)], Pose(1, 0), grid()) == 0.0


def test_traditional_cost_linear_combination():
    # endpoint (0, 0.5): d_path 0.5, d_goal 2.0, heading off by 0.1, every cell costs 0.2
    t = traj((0, 0, 0), (0, 0.5, math.pi / 2 + 0.1))
    w = TraditionalWeights(1, 1, 1, 1)
    c = traditional_cost(t, [(0, 0)], Pose(0, 2.5), grid(0.2), w, footprint_radius=0.0)
    assert c == pytest.approx(2.8)
    w2 = TraditionalWeights(2, 2, 2, 2)
    assert traditional_cost(t, [(0, 0)], Pose(0, 2.5), grid(0.2), w2, 0.0) == pytest.approx(5.6)


def test_traditional_cost_infeasible():
    cells = np.zeros((100, 100))
    cells[50, 50] = INFEASIBLE
    g = OccupancyGrid(0.1, 100, 100, Pose(-5, -5), cells)
    t = traj((-1, 0, 0), (0.05, 0.05, 0), (1, 0, 0))
    assert traditional_cost(t, [(1, 0)], Pose(1, 0), g, footprint_radius=0.0) == INFEASIBLE


def test_traditional_cost_depends_on_endpoint_and_max_only():
    g = grid()
    a = traj((0, 0, 0), (1, 0, 0), (2, 1, 0.3))
    b = traj((0, 0, 0), (0.5, 0.2, 0), (1.5, 0.8, 0), (2, 1, 0.3))
    args = ([(0, 0), (3, 0)], Pose(3, 3), g)
    assert traditional_cost(a, *args) == traditional_cost(b, *args)


def test_weights_validation():
    with pytest.raises(ConfigError):
        TraditionalWeights(0, 0, 0, 0)
    with pytest.raises(ConfigError):
        TraditionalWeights(-1, 1, 1, 1)
    with pytest.raises(ConfigError):
        ProxemicZones(intimate=2.0)


def test_personal_space_examples():
    h = [Human(Pose(0, 0))]
    assert personal_space_cost(traj((0, 0, 0)), h) == 1.0
    assert personal_space_cost(traj((0.6, 0, 0)), h) == pytest.approx(math.exp(-0.5))
    assert personal_space_cost(traj((3.6, 0, 0), (0, 4, 0)), h) < 0.01
    assert personal_space_cost(traj((0, 0, 0)), []) == 0.0


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=6),
       st.floats(1.05, 3.0))
def test_personal_space_decreases_with_distance(pts, k):
    h = [Human(Pose(0, 0))]
    near = traj(*[(x, y, 0) for x, y in pts])
    far = near.copy()
    far[:, :2] *= k
    # every distance strictly grows unless a pose sits on the human
    if np.all(np.hypot(near[:, 0], near[:, 1]) > 1e-3):
        a, b = personal_space_cost(near, h), personal_space_cost(far, h)
        assert b <= a
        if a > 1e-300:
            assert b < a


def test_right_side_examples():
    axis = CorridorAxis((0, 0), (1, 0), 1.0)
    right = traj((0, -0.5, 0), (1, -0.5, 0))
    left = traj((0, 0.5, 0), (1, 0.5, 0))
    center = traj((0, 0, 0), (1, 0, 0))
    assert right_side_cost(right, axis) == 0.0
    assert right_side_cost(left, axis) == pytest.approx(0.5)
    assert right_side_cost(center, axis) == 0.0
    # travelling -x flips which side is right
    back = traj((1, -0.5, math.pi), (0, -0.5, math.pi))
    assert right_side_cost(back, axis) == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        CorridorAxis((0, 0), (0, 0), 1.0)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-4, 4)),
                min_size=1, max_size=8))
def test_right_side_in_unit_interval(poses):
    c = right_side_cost(traj(*poses), CorridorAxis((0, 0), (0.6, 0.8), 1.5))
    assert 0.0 <= c <= 1.0


def test_social_goal_examples():
    g = Pose(4, 0)
    assert social_goal_cost(traj((0, 0, 0), (4, 0, 0)), g) == 0.0
    assert social_goal_cost(traj((0, 0, 0), (0, 0, 0)), g) == 1.0
    assert social_goal_cost(traj((0, 0, 0), (-9, 0, 0)), g) == 2.0


def test_select_objectives_examples():
    one_hot = {lab: 0.0 for lab in LABELS}
    p = dict(one_hot, **{ContextLabel.PASSING: 1.0})
    assert select_objectives(p) == [(O.TRADITIONAL_COST, 1.0), (O.PERSONAL_SPACE, 1.0),
                                    (O.RIGHT_SIDE, 1.0)]
    mix = {ContextLabel.PASSING: 0.5, ContextLabel.MEETING: 0.5}
    assert dict(select_objectives(mix)) == {O.TRADITIONAL_COST: 1.0, O.PERSONAL_SPACE: 1.0,
                                            O.RIGHT_SIDE: 0.5}
    q = dict(select_objectives({ContextLabel.QUEUE_WAITING: 1.0}))
    assert q[O.SOCIAL_GOAL_DISTANCE] == 1.0 and O.RIGHT_SIDE not in q
    assert select_objectives(None) == [(O.TRADITIONAL_COST, 1.0)]


def test_select_objectives_drops_small_weights():
    post = {ContextLabel.MEETING: 0.96, ContextLabel.PASSING: 0.04}
    assert O.RIGHT_SIDE not in dict(select_objectives(post))


def test_select_objectives_rejects_bad_posterior():
    with pytest.raises(ValueError):
        select_objectives({ContextLabel.PASSING: 0.7})


@given(st.lists(st.floats(0, 1), min_size=6, max_size=6).filter(lambda v: sum(v) > 1e-3))
def test_select_objectives_structure(raw):
    post = {lab: v / sum(raw) for lab, v in zip(LABELS, raw)}
    sel = select_objectives(post)
    assert sel[0] == (O.TRADITIONAL_COST, 1.0)
    ids = [i for i, _ in sel]
    assert len(ids) == len(set(ids))
    assert all(0.05 <= w <= 1.0 for _, w in sel)
    assert sel == select_objectives(post)


def test_activation_override():
    table = parse_activation({"Passing": ["TraditionalCost"]})
    assert table[ContextLabel.PASSING] == (O.TRADITIONAL_COST,)
    assert table[ContextLabel.MEETING] == DEFAULT_ACTIVATION[ContextLabel.MEETING]
    assert select_objectives({ContextLabel.PASSING: 1.0},
                             activation={"Passing": ["TraditionalCost"]}) == [
        (O.TRADITIONAL_COST, 1.0)]
    with pytest.raises(ConfigError):
        parse_activation({"Dancing": []})
    with pytest.raises(ConfigError):
        parse_activation({"Passing": ["Bogus"]})
