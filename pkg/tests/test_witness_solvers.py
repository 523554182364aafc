"""Fixture values for the witness solvers."""
import math

import numpy as np
import pytest

from quant_helly.errors import DegenerateInput, InvalidInput, NoFiniteEps
from quant_helly.geom_core import AxisBox, Ellipsoid, HPolytope, contains, intersection
from quant_helly.utils import make_rng
from quant_helly.witness_solvers import (
    EllipsoidConstraint,
    Objective,
    SolveStatus,
    WitnessClass,
    WitnessProblem,
    max_gaussian_box,
    max_gaussian_witness,
    max_hconvex,
    max_increasing_segment,
    max_perimeter_box,
    max_trace_ellipsoid,
    max_translate_scale,
    max_volume_box,
    max_volume_ellipsoid,
    max_volume_zonotope,
    min_enclosing_ellipsoid,
    min_eps_approx,
    simultaneous_approx,
)

HEXAGON = np.column_stack([np.cos(np.pi * np.arange(6) / 3), np.sin(np.pi * np.arange(6) / 3)])


def test_mvie_of_square(square):
    report = max_volume_ellipsoid([square])
    assert report.status is SolveStatus.OPTIMAL
    assert report.objective_value == pytest.approx(math.pi, abs=1e-5)
    np.testing.assert_allclose(report.witness.center, [0.0, 0.0], atol=1e-5)


def test_mvie_of_triangle_is_steiner_inellipse(triangle):
    report = max_volume_ellipsoid([triangle])
    assert report.objective_value == pytest.approx(math.pi / (6 * math.sqrt(3)), abs=1e-4)
    np.testing.assert_allclose(report.witness.center, [1 / 3, 1 / 3], atol=1e-4)
    assert contains(triangle, report.witness, tol=1e-7)


def test_centered_and_axis_parallel_ellipses(square):
    assert max_volume_ellipsoid([square], EllipsoidConstraint.CENTERED).objective_value == pytest.approx(
        math.pi, abs=1e-5)
    assert max_volume_ellipsoid([square], EllipsoidConstraint.AXIS_PARALLEL).objective_value == pytest.approx(
        math.pi, abs=1e-5)


def test_trace_ellipsoid(square):
    report = max_trace_ellipsoid([square])
    assert report.extras["trace"] == pytest.approx(2.0, abs=1e-4)
    assert report.extras["axis_length_sum"] == pytest.approx(4.0, abs=1e-4)


def test_box_on_triangle(triangle):
    report = max_volume_box([triangle])
    assert report.objective_value == pytest.approx(0.25, abs=1e-6)
    np.testing.assert_allclose(report.witness.halfwidths, [0.25, 0.25], atol=1e-5)


def test_perimeter_and_gaussian_box(square):
    perimeter = max_perimeter_box([square])
    assert perimeter.objective_value == pytest.approx(4.0)
    assert perimeter.extras["diameter"] == pytest.approx(2 * math.sqrt(2))
    gaussian = max_gaussian_box([square])
    assert gaussian.objective_value == pytest.approx(math.erf(1 / math.sqrt(2)) ** 2, abs=1e-6)


def test_zonotope_in_square(square):
    report = max_volume_zonotope([square], np.eye(2))
    assert report.objective_value == pytest.approx(4.0, abs=1e-5)


def test_hexagon_in_polygon():
    report = max_hconvex([HPolytope.regular_polygon(64, 1.0)], HEXAGON)
    assert 2.598076 - 1e-6 <= report.objective_value <= 2.60441 + 1e-6


def test_translate_scale(square):
    report = max_translate_scale([square], Ellipsoid([0.0, 0.0], np.eye(2)))
    assert report.objective_value == pytest.approx(1.0)
    shifted = HPolytope.box([0.0, 0.0], [4.0, 2.0])
    assert max_translate_scale([shifted], AxisBox([0.0, 0.0], [0.5, 0.5])).objective_value == pytest.approx(2.0)


def test_increasing_segment(square):
    report = max_increasing_segment([square])
    assert report.objective_value == pytest.approx(4.0)
    assert report.extras["l2_length"] == pytest.approx(2 * math.sqrt(2))
    assert report.witness.is_increasing


def test_disjoint_family_is_infeasible():
    a = HPolytope.box([0.0, 0.0], [1.0, 1.0])
    b = HPolytope.box([2.0, 2.0], [3.0, 3.0])
    assert max_volume_box([a, b]).status is SolveStatus.INFEASIBLE
    assert max_volume_ellipsoid([a, b]).status is SolveStatus.INFEASIBLE


def test_halfplane_is_unbounded():
    half = HPolytope.from_arrays([[1.0, 0.0]], [1.0])
    assert max_volume_ellipsoid([half]).status is SolveStatus.UNBOUNDED


def test_enclosing_ellipse_of_diamond():
    report = min_enclosing_ellipsoid([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert report.objective_value == pytest.approx(math.pi, abs=1e-5)
    with pytest.raises(DegenerateInput):
        min_enclosing_ellipsoid([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])


def test_rotated_square_approximation(square):
    diamond = HPolytope.regular_polygon(4, 1.0, phase=math.pi / 4)
    result = min_eps_approx([square, diamond], WitnessClass.AXIS_BOX)
    assert result.eps == pytest.approx(1.0, abs=1e-5)


def test_octagon_approximation(octagon):
    result = min_eps_approx([octagon], WitnessClass.AXIS_BOX)
    assert result.eps == pytest.approx(math.sqrt(2) - 1, abs=1e-4)


def test_approximation_needs_bounded_family():
    half = HPolytope.from_arrays([[1.0, 0.0]], [1.0])
    with pytest.raises(NoFiniteEps):
        min_eps_approx([half], WitnessClass.AXIS_BOX)


def test_witness_problem_dispatch(square):
    problem = WitnessProblem((square,), WitnessClass.AXIS_BOX, Objective.PERIMETER)
    assert problem.solve().objective_value == pytest.approx(4.0)
    with pytest.raises(InvalidInput):
        WitnessProblem((square,), WitnessClass.ZONOTOPE)
    with pytest.raises(InvalidInput):
        WitnessProblem((square,), WitnessClass.ELLIPSOID, Objective.PERIMETER)
    report = WitnessProblem((square,), WitnessClass.ZONOTOPE, Objective.GAUSSIAN_MC, directions=np.eye(2)).solve()
    assert report.extras["heuristic"]


def test_mee_touches_the_cloud(rng):
    points = rng.uniform(0.0, 1.0, size=(100, 2))
    report = min_enclosing_ellipsoid(points)
    ellipse = report.witness
    local = np.linalg.solve(ellipse.shape, (points - ellipse.center).T)
    q = np.sum(local**2, axis=0)
    assert q.max() == pytest.approx(1.0, abs=1e-9)
    assert ellipse.contains_points(points, tol=1e-9).all()
    shrunk = Ellipsoid(ellipse.center, ellipse.shape / (1 + 1e-6))
    assert not shrunk.contains_points(points).all()


def test_mee_of_equilateral_triangle_is_circumcircle():
    angles = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    report = min_enclosing_ellipsoid(np.column_stack([np.cos(angles), np.sin(angles)]))
    assert report.objective_value == pytest.approx(math.pi, abs=1e-5)
    np.testing.assert_allclose(report.witness.center, [0.0, 0.0], atol=1e-5)


def test_trace_ellipsoid_of_thin_box():
    thin = HPolytope.box([-1.0, -0.1], [1.0, 0.1])
    assert max_trace_ellipsoid([thin]).extras["trace"] == pytest.approx(1.1, abs=1e-4)


def test_zonotope_with_diagonal_fills_unit_square(unit_square):
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])
    report = max_volume_zonotope([unit_square], dirs)
    assert report.objective_value == pytest.approx(1.0, abs=1e-4)
    assert contains(unit_square, report.witness, tol=1e-7)


def test_perimeter_box_on_triangle(triangle):
    report = max_perimeter_box([triangle])
    assert report.objective_value == pytest.approx(1.0, abs=1e-7)
    assert contains(triangle, report.witness, tol=1e-7)


def test_strip_family_needs_eps_one(unit_square):
    strip = HPolytope.box([0.25, 0.0], [0.75, 1.0])
    assert min_eps_approx([unit_square, strip], WitnessClass.AXIS_BOX).eps == pytest.approx(1.0, abs=1e-5)
    assert not simultaneous_approx([unit_square, strip], WitnessClass.AXIS_BOX, 0.9).feasible
    exact = simultaneous_approx([unit_square, strip], WitnessClass.AXIS_BOX, 1.0)
    assert exact.feasible
    assert contains(strip, exact.witness, tol=1e-7)


def _random_octagon(rng):
    angles = 2 * np.pi * (np.arange(8) + rng.uniform(0.0, 0.8, size=8)) / 8
    normals = np.column_stack([np.cos(angles), np.sin(angles)])
    return HPolytope.from_arrays(normals, rng.uniform(0.5, 1.5, size=8))


def test_mvie_volume_ratio_stays_below_john_bound():
    rng = make_rng(2024)
    for _ in range(30):
        poly = _random_octagon(rng)
        report = max_volume_ellipsoid([poly])
        assert report.ok
        assert poly.volume() <= 4 * report.objective_value
        assert poly.volume() >= report.objective_value


def _assert_gaussian_witness(family, report):
    assert report.ok
    assert report.extras["heuristic"]
    assert report.objective_value >= report.extras["start_value"]
    assert contains(intersection(family), report.witness, tol=1e-7)


def test_gaussian_zonotope_in_square(square):
    report = max_gaussian_witness([square], WitnessClass.ZONOTOPE, directions=np.eye(2))
    _assert_gaussian_witness([square], report)
    assert report.objective_value == pytest.approx(math.erf(1 / math.sqrt(2)) ** 2, abs=0.02)
    again = max_gaussian_witness([square], WitnessClass.ZONOTOPE, directions=np.eye(2))
    assert again.objective_value == report.objective_value


def test_gaussian_ellipse_in_offset_box():
    box = HPolytope.box([-0.5, -1.0], [3.0, 1.0])
    report = max_gaussian_witness([box], WitnessClass.ELLIPSOID)
    _assert_gaussian_witness([box], report)
    assert report.extras["start_volume"] == pytest.approx(math.pi * 1.75, abs=1e-4)


def test_gaussian_hexagon_in_polygon():
    family = [HPolytope.regular_polygon(64, 1.0)]
    report = max_gaussian_witness(family, WitnessClass.HCONVEX, hset=HEXAGON, max_evals=150)
    _assert_gaussian_witness(family, report)
    assert 0.3 < report.objective_value < 0.4


def test_gaussian_witness_rejects_other_classes(square):
    with pytest.raises(InvalidInput):
        max_gaussian_witness([square], WitnessClass.TRANSLATE)
