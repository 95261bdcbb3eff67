"""Constraint sets: projections, certificates, sampling, validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxequil import (
    Annulus,
    Ball,
    Box,
    BoxMinusBall,
    DegenerateProjection,
    DimensionMismatch,
    Halfspace,
    NonFiniteValue,
    PointNotInSet,
    SamplingExhausted,
    Sphere,
    TwoBallUnion,
)
from proxequil.geometry import as_vector
from problems import exterior_boundary_pairs, shipped_sets

CONVEX_KINDS = (Box, Ball, Halfspace)


def _random_points(s, n, seed, inflate=0.5):
    rng = np.random.default_rng(seed)
    lo, hi = s.bounding_box
    span = hi - lo
    return lo - inflate * span + rng.random((n, s.dim)) * (1.0 + 2.0 * inflate) * span


def test_distance_frozen_values():
    assert Ball(np.zeros(2), 1.0).distance(np.array([2.0, 0.0])) == pytest.approx(1.0)
    assert Sphere(np.zeros(2), 1.0).distance(np.zeros(2)) == pytest.approx(1.0)
    assert Box(np.zeros(2), np.ones(2)).distance(np.array([2.0, 2.0])) == pytest.approx(
        np.sqrt(2.0)
    )


def test_prox_constants():
    box, ball, halfspace, sphere, annulus, bmb, tbu = shipped_sets()
    assert np.isinf(box.prox_constant)
    assert np.isinf(ball.prox_constant)
    assert np.isinf(halfspace.prox_constant)
    assert sphere.prox_constant == 2.0
    assert annulus.prox_constant == 1.0
    assert bmb.prox_constant == 1.0
    # half the gap between the two unit balls centered at (-2,0) and (2,0)
    assert tbu.prox_constant == 1.0


def test_projection_idempotent_and_member():
    for k, s in enumerate(shipped_sets()):
        pts = _random_points(s, 200, seed=k)
        for x in pts:
            p1 = s.project(x).point
            p2 = s.project(p1).point
            assert np.max(np.abs(p2 - p1)) <= 1e-12
            assert s.contains(p1)


@settings(max_examples=200, deadline=None)
@given(st.tuples(st.floats(-50, 50), st.floats(-50, 50)))
def test_ball_projection_properties(xy):
    s = Ball(np.array([0.5, -0.5]), 2.0)
    x = np.array(xy)
    p = s.project(x).point
    assert s.contains(p)
    assert np.linalg.norm(p - s.center) <= s.radius + 1e-12
    np.testing.assert_allclose(s.project(p).point, p, atol=1e-12)


def test_convex_projections_nonexpansive():
    for k, s in enumerate(shipped_sets()):
        if not isinstance(s, CONVEX_KINDS):
            continue
        xs = _random_points(s, 1000, seed=10 + k)
        ys = _random_points(s, 1000, seed=20 + k)
        for x, y in zip(xs, ys):
            px = s.project(x).point
            py = s.project(y).point
            assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


def test_sphere_center_tiebreak():
    s = Sphere(np.array([1.0, 2.0]), 3.0)
    res = s.project(np.array([1.0, 2.0]))
    assert not res.unique
    np.testing.assert_allclose(res.point, [4.0, 2.0], atol=0)
    with pytest.raises(DegenerateProjection):
        s.project(np.array([1.0, 2.0]), strict_uniqueness=True)


def test_two_ball_bisector_tiebreak():
    s = TwoBallUnion(np.array([-2.0, 0.0]), 1.0, np.array([2.0, 0.0]), 1.0)
    res = s.project(np.array([0.0, 0.3]))
    assert not res.unique
    # equidistant from both balls; the lexicographically smaller center wins
    assert res.point[0] < 0
    assert s.contains(res.point)
    with pytest.raises(DegenerateProjection):
        s.project(np.array([0.0, 0.3]), strict_uniqueness=True)
    # clearly one-sided points are unique
    assert s.project(np.array([2.5, 0.0])).unique


def test_annulus_projects_hole_to_inner_rim():
    s = Annulus(np.zeros(2), 1.0, 2.0)
    np.testing.assert_allclose(
        s.project(np.array([0.25, 0.0])).point, [1.0, 0.0], atol=1e-12
    )
    np.testing.assert_allclose(
        s.project(np.array([3.0, 0.0])).point, [2.0, 0.0], atol=1e-12
    )


def test_box_minus_ball_projections():
    s = BoxMinusBall(np.array([-2.0, -2.0]), np.array([2.0, 2.0]), np.zeros(2), 1.0)
    # hole points push radially to the removed sphere
    np.testing.assert_allclose(
        s.project(np.array([0.5, 0.0])).point, [1.0, 0.0], atol=1e-12
    )
    # exterior points clip to the box
    np.testing.assert_allclose(
        s.project(np.array([3.0, 1.0])).point, [2.0, 1.0], atol=1e-12
    )


def test_proximal_normal_certificates():
    for k, s in enumerate(shipped_sets()):
        for u, w in exterior_boundary_pairs(s, 20, seed=100 + k):
            rep = s.proximal_normal_check(u, w, n_samples=2000, seed=k)
            assert rep.passed, (type(s).__name__, rep.max_violation)


def test_normal_check_rejects_overclaimed_constant():
    """Claiming a larger prox constant than the geometry supports must fail."""
    sphere = Sphere(np.zeros(2), 1.0)
    inward = sphere.proximal_normal_check(
        np.array([1.0, 0.0]), np.array([-1.0, 0.0]), prox_constant=10.0
    )
    assert not inward.passed
    assert inward.max_violation > 1e-3

    tbu = TwoBallUnion(np.array([-2.0, 0.0]), 1.0, np.array([2.0, 0.0]), 1.0)
    rep = tbu.proximal_normal_check(
        np.array([-1.0, 0.0]), np.array([1.0, 0.0]), prox_constant=3.0
    )
    assert not rep.passed


def test_normal_check_validation():
    ball = Ball(np.zeros(2), 1.0)
    with pytest.raises(PointNotInSet):
        ball.proximal_normal_check(np.array([5.0, 0.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        ball.proximal_normal_check(np.array([1.0, 0.0]), np.array([2.0, 0.0]))


def test_membership_along_normal_ray():
    """u stays the projection of u + t*w for t below the prox constant."""
    for k, s in enumerate(shipped_sets()):
        t = 0.9 * min(s.prox_constant, 2.0)
        for u, w in exterior_boundary_pairs(s, 10, seed=200 + k):
            back = s.project(u + t * w).point
            np.testing.assert_allclose(back, u, atol=1e-8)


def test_sampling_deterministic_and_feasible():
    for k, s in enumerate(shipped_sets()):
        a = s.sample(50, seed=300 + k)
        b = s.sample(50, seed=300 + k)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (50, s.dim)
        for x in a:
            assert s.contains(x)


def test_sphere_sampling_unit_norm():
    pts = Sphere(np.zeros(3), 1.0).sample(3, seed=7)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_sampling_exhausted():
    # window sits entirely outside the halfspace, rejection can never succeed
    hs = Halfspace(np.array([1.0, 0.0]), -5.0, np.zeros(2), np.ones(2))
    with pytest.raises(SamplingExhausted):
        hs.sample(5, seed=0)


def test_constructor_validation():
    with pytest.raises(ValueError):
        Box(np.ones(2), np.zeros(2))
    with pytest.raises(ValueError):
        Ball(np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        Sphere(np.zeros(2), -1.0)
    with pytest.raises(ValueError):
        Annulus(np.zeros(2), 2.0, 1.0)
    with pytest.raises(ValueError):
        Halfspace(np.zeros(2), 1.0, np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        BoxMinusBall(np.zeros(2), np.ones(2), np.array([5.0, 5.0]), 0.5)
    with pytest.raises(ValueError):
        TwoBallUnion(np.zeros(2), 1.0, np.array([1.0, 0.0]), 1.0)


def test_as_vector_validation():
    with pytest.raises(DimensionMismatch):
        as_vector(np.zeros(3), dim=2)
    with pytest.raises(NonFiniteValue):
        as_vector(np.array([1.0, np.nan]))
    with pytest.raises(DimensionMismatch):
        as_vector(np.zeros((2, 2)))
