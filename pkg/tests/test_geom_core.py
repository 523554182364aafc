"""Tests for bodies, support functions and the LP kernel."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quant_helly.errors import (
    DirectionMismatch,
    HalfSphereViolation,
    InvalidInput,
    NotSPD,
    Unbounded,
)
from quant_helly.geom_core import (
    AxisBox,
    Ellipsoid,
    HConvexSet,
    HPolytope,
    LpStatus,
    Segment,
    Zonotope,
    check_direction_set,
    contains,
    containment_margin,
    diameter,
    dilate,
    gaussian_measure,
    hull_distance,
    lp_solve,
    minkowski_combine,
    sphere_directions,
    support,
    unit_ball_volume,
)
from quant_helly.utils import make_rng

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=0.05, max_value=3.0, allow_nan=False, allow_infinity=False)


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_square_support_and_volume(square):
    assert support(square, [1.0, 0.0]) == pytest.approx(1.0)
    assert support(square, [1.0, 1.0]) == pytest.approx(2.0)
    assert square.volume() == pytest.approx(4.0)
    assert square.vertex_array.shape == (4, 2)


def test_support_rejects_zero_direction(square):
    with pytest.raises(InvalidInput):
        support(square, [0.0, 0.0])


def test_halfplane_is_unbounded():
    half = HPolytope.from_arrays([[1.0, 0.0]], [1.0])
    assert not half.is_bounded
    with pytest.raises(Unbounded):
        half.volume()


def test_empty_polytope():
    empty = HPolytope.from_arrays([[1.0, 0.0], [-1.0, 0.0]], [0.0, -1.0])
    assert empty.is_empty


def test_triangle_area(triangle):
    assert triangle.volume() == pytest.approx(0.5)


def test_regular_polygon_area(octagon):
    # 2 n tan(pi/n) for inradius 1
    assert octagon.volume() == pytest.approx(16 * math.tan(math.pi / 8))


def test_box_in_square(square):
    assert contains(square, AxisBox([0.0, 0.0], [1.0, 1.0]))
    assert not contains(square, AxisBox([0.5, 0.0], [1.0, 0.5]))
    assert containment_margin(square, AxisBox([0.0, 0.0], [0.5, 0.25])) == pytest.approx(0.5)


def test_disc_in_square(square):
    assert contains(square, Ellipsoid([0.0, 0.0], np.eye(2)))
    assert not contains(square, Ellipsoid([0.0, 0.0], 1.01 * np.eye(2)))


def test_ellipsoid_must_be_spd():
    with pytest.raises(NotSPD):
        Ellipsoid([0.0, 0.0], np.diag([1.0, -1.0]))
    with pytest.raises(NotSPD):
        Ellipsoid([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])


def test_box_zonotope_agree():
    box = AxisBox([1.0, -1.0], [0.5, 2.0])
    zono = box.as_zonotope()
    assert zono.volume() == pytest.approx(box.volume())
    U = sphere_directions(2, 64)
    np.testing.assert_allclose(zono.support_many(U), box.support_many(U), atol=1e-12)


def test_zonotope_volume_hexagon():
    # three unit generators at 60 degrees: area sum |det| = 3 * sin(60)
    t = np.array([0.0, np.pi / 3, 2 * np.pi / 3])
    zono = Zonotope([0.0, 0.0], np.column_stack([np.cos(t), np.sin(t)]), [1.0, 1.0, 1.0])
    assert zono.volume() == pytest.approx(3 * math.sin(math.pi / 3))
    assert zono.as_hpolytope().volume() == pytest.approx(zono.volume())


def test_segment_lengths():
    seg = Segment([0.0, 0.0], [3.0, 4.0])
    assert seg.l1_length == pytest.approx(7.0)
    assert seg.length == pytest.approx(5.0)
    assert seg.is_increasing
    assert not Segment([0.0, 0.0], [1.0, -1.0]).is_increasing
    assert diameter(seg) == pytest.approx(5.0)


def test_direction_set_half_sphere():
    with pytest.raises(HalfSphereViolation):
        check_direction_set([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    hset = check_direction_set([[2.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    np.testing.assert_allclose(np.linalg.norm(hset, axis=1), 1.0)


def test_hconvex_square():
    hset = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    body = HConvexSet(hset, [1.0, 1.0, 1.0, 1.0])
    assert body.volume() == pytest.approx(4.0)
    assert body.support([1.0, 1.0]) == pytest.approx(2.0)


def test_minkowski_combine_zonotopes():
    dirs = np.eye(2)
    a = Zonotope([0.0, 0.0], dirs, [1.0, 2.0])
    b = Zonotope([2.0, 0.0], dirs, [3.0, 2.0])
    mid = minkowski_combine(a, b, 0.5)
    np.testing.assert_allclose(mid.center, [1.0, 0.0])
    np.testing.assert_allclose(mid.coeffs, [2.0, 2.0])
    other = Zonotope([0.0, 0.0], [[1.0, 0.0], [1.0, 1.0]], [1.0, 1.0])
    with pytest.raises(DirectionMismatch):
        minkowski_combine(a, other, 0.5)
    with pytest.raises(InvalidInput):
        minkowski_combine(a, b, 1.5)


def test_dilate_scales_volume():
    box = AxisBox([0.0, 0.0], [1.0, 1.0])
    assert dilate(box, 2.0, [1.0, 1.0]).volume() == pytest.approx(16.0)
    ell = Ellipsoid([0.0, 0.0], np.eye(2))
    assert dilate(ell, 0.5).volume() == pytest.approx(math.pi / 4)
    with pytest.raises(InvalidInput):
        dilate(box, 0.0)


def test_gaussian_measure_box_is_exact():
    value, err = gaussian_measure(AxisBox([0.0, 0.0], [1.0, 1.0]))
    assert err == 0.0
    assert value == pytest.approx(math.erf(1 / math.sqrt(2)) ** 2)


def test_gaussian_measure_monte_carlo_disc():
    value, err = gaussian_measure(Ellipsoid([0.0, 0.0], np.eye(2)), make_rng(1), samples=200_000)
    # chi-square with two degrees of freedom: 1 - exp(-1/2)
    assert abs(value - (1 - math.exp(-0.5))) < 5 * err + 1e-3


def test_sphere_directions_are_unit():
    for d in (2, 3, 4):
        U = sphere_directions(d, 100)
        assert U.shape == (100, d)
        np.testing.assert_allclose(np.linalg.norm(U, axis=1), 1.0)


def test_hull_distance():
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert hull_distance([0.2, 0.2], cloud) == pytest.approx(0.0, abs=1e-9)
    assert hull_distance([2.0, 0.0], cloud) == pytest.approx(1.0, abs=1e-7)


def test_lp_solve_statuses():
    res = lp_solve([1.0, 1.0], [([1.0, 0.0], 1.0), ([0.0, 1.0], 2.0), ([-1.0, 0.0], 0.0), ([0.0, -1.0], 0.0)])
    assert res.status is LpStatus.OPTIMAL
    assert res.value == pytest.approx(3.0)
    assert lp_solve([1.0], [([-1.0], 0.0)]).status is LpStatus.UNBOUNDED
    assert lp_solve([1.0], [([1.0], -1.0), ([-1.0], -1.0)]).status is LpStatus.INFEASIBLE


@settings(max_examples=50, deadline=None)
@given(cx=finite, cy=finite, wx=positive, wy=positive, ux=finite, uy=finite, vx=finite, vy=finite)
def test_box_support_is_sublinear(cx, cy, wx, wy, ux, uy, vx, vy):
    box = AxisBox([cx, cy], [wx, wy])
    u, v = np.array([ux, uy]), np.array([vx, vy])
    both = box.support_many(np.vstack([u, v, u + v]))
    assert both[2] <= both[0] + both[1] + 1e-9


@settings(max_examples=50, deadline=None)
@given(a=st.lists(positive, min_size=3, max_size=3), b=st.lists(positive, min_size=3, max_size=3),
       lam=st.floats(min_value=0.0, max_value=1.0))
def test_zonotope_volume_is_log_concave(a, b, lam):
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    za, zb = Zonotope([0.0, 0.0], dirs, a), Zonotope([0.0, 0.0], dirs, b)
    mix = minkowski_combine(za, zb, lam)
    assert math.log(mix.volume()) >= lam * math.log(za.volume()) + (1 - lam) * math.log(zb.volume()) - 1e-9


def test_box_sticks_out_of_triangle(triangle):
    assert not contains(triangle, AxisBox([0.5, 0.5], [0.25, 0.25]))
    assert contains(triangle, AxisBox([0.25, 0.25], [0.25, 0.25]))


def test_tangent_pentagon_vertex_radius():
    angles = 2 * np.pi * np.arange(5) / 5
    pentagon = HPolytope.from_arrays(np.column_stack([np.cos(angles), np.sin(angles)]), np.ones(5))
    radii = np.linalg.norm(pentagon.vertex_array, axis=1)
    assert radii.shape == (5,)
    np.testing.assert_allclose(radii, 1.23607, atol=1e-5)


def test_zonotope_volume_with_diagonal():
    zono = Zonotope([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [1.0, 1.0, 1.0])
    assert zono.volume() == pytest.approx(3.0)


def test_zonotope_support_with_diagonal():
    r = 1 / math.sqrt(2)
    zono = Zonotope([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0], [r, r]], [1.0, 1.0, 1.0])
    assert zono.support([1.0, 0.0]) == pytest.approx(0.85355, abs=1e-5)


spd_entries = st.lists(finite, min_size=4, max_size=4)


def _spd(entries) -> np.ndarray:
    M = np.array(entries).reshape(2, 2)
    return M @ M.T + 0.1 * np.eye(2)


@settings(max_examples=50, deadline=None)
@given(a=spd_entries, b=spd_entries, lam=st.floats(min_value=0.0, max_value=1.0))
def test_log_det_is_concave(a, b, lam):
    A, B = _spd(a), _spd(b)
    mix = np.linalg.slogdet(lam * A + (1 - lam) * B)[1]
    assert mix >= lam * np.linalg.slogdet(A)[1] + (1 - lam) * np.linalg.slogdet(B)[1] - 1e-9
