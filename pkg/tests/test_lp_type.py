import math

import numpy as np
import pytest

from quant_helly.errors import InvalidInput, TooManySubsets
from quant_helly.geom_core import HPolytope, intersection
from quant_helly.lp_type import (
    LpTypeProblem,
    approx_problem,
    calibrate_calls,
    calibration_csv,
    ellipsoid_problem,
    enclosing_ball_problem,
    random_ball_instance,
    random_box_instance,
    smallest_ball,
    solve,
    solve_exhaustive,
)
from quant_helly.utils import make_rng, spawn_seeds
from quant_helly.witness_solvers import max_volume_ellipsoid


def test_smallest_ball_of_triangle():
    ball = smallest_ball([[0.0, 0.0], [2.0, 0.0], [1.0, 0.1]])
    # obtuse triangle: the long side is a diameter
    np.testing.assert_allclose(ball.center, [1.0, 0.0], atol=1e-12)
    assert ball.radius == pytest.approx(1.0)


def test_enclosing_ball_matches_exhaustive(rng):
    points = rng.uniform(-1.0, 1.0, size=(12, 2))
    fast = solve(enclosing_ball_problem(points), seed=3)
    slow = solve_exhaustive(enclosing_ball_problem(points))
    assert fast.report.objective_value == pytest.approx(slow.report.objective_value, abs=1e-9)
    assert len(fast.basis) <= 3
    dist = np.linalg.norm(points - fast.report.witness.center, axis=1)
    assert np.all(dist <= fast.report.objective_value + 1e-9)


def test_solve_is_reproducible(rng):
    problem = enclosing_ball_problem(rng.uniform(-1.0, 1.0, size=(30, 2)))
    first, second = solve(problem, seed=11), solve(problem, seed=11)
    assert first.basis_indices == second.basis_indices
    assert first.stats.oracle_calls == second.stats.oracle_calls


def test_box_problem_matches_exhaustive():
    for seed in spawn_seeds(7, 5):
        problem = random_box_instance(8, make_rng(seed))
        fast = solve(problem, seed)
        slow = solve_exhaustive(problem)
        assert fast.report.objective_value == pytest.approx(slow.report.objective_value, rel=1e-6)
        assert len(fast.basis) <= 4
        # the planted box survives
        assert fast.report.objective_value >= 1.0 - 1e-6


@pytest.mark.slow
def test_hundred_box_instances_match_exhaustive():
    for seed in spawn_seeds(2024, 100):
        problem = random_box_instance(12, make_rng(seed))
        assert solve(problem, seed).report.objective_value == pytest.approx(
            solve_exhaustive(problem).report.objective_value, rel=1e-6)


def test_approx_problem_on_square_and_diamond(square):
    diamond = HPolytope.regular_polygon(4, 1.0, phase=math.pi / 4)
    result = solve(approx_problem([square, diamond, square]), seed=0)
    assert result.report.objective_value == pytest.approx(1.0, abs=1e-5)


def test_exhaustive_cap(rng):
    problem = enclosing_ball_problem(rng.uniform(size=(20, 2)))
    with pytest.raises(TooManySubsets):
        solve_exhaustive(problem)


def test_problem_validation():
    with pytest.raises(InvalidInput):
        LpTypeProblem((), 1, lambda s: None, lambda r, c: False)
    with pytest.raises(InvalidInput):
        LpTypeProblem((1,), 1, lambda s: None, lambda r, c: False, sense="up")


def test_calibration_rows_and_csv():
    rows, table = calibrate_calls(random_ball_instance, [10, 40], trials=3, seed=5)
    assert len(rows) == 6
    assert [n for n, _ in table] == [10, 40]
    assert all(mean >= 1 for _, mean in table)
    text = calibration_csv(rows)
    assert text.splitlines()[0] == "n,trial,seed,oracle_calls,violation_tests,objective"
    assert len(text.splitlines()) == 7
    assert calibrate_calls(random_ball_instance, [10], trials=0) == ([], [])


def test_calls_grow_slowly():
    _, table = calibrate_calls(random_ball_instance, [20, 200], trials=10, seed=1)
    # expected calls are linear in n, far below n^2
    assert table[1][1] < 200 * 20


@pytest.mark.slow
def test_calls_grow_sublinearly_from_100_to_400():
    _, table = calibrate_calls(random_ball_instance, [100, 400], trials=20, seed=1)
    (_, small), (_, large) = table
    assert large < 8 * small


def test_ellipsoid_problem_matches_exhaustive():
    rng = make_rng(99)
    angles = 2 * np.pi * (np.arange(7) + rng.uniform(0.0, 0.5, size=7)) / 7
    family = [HPolytope.from_arrays([[math.cos(t), math.sin(t)]], [r])
              for t, r in zip(angles, rng.uniform(0.8, 1.2, size=7))]
    problem = ellipsoid_problem(family)
    assert problem.combinatorial_dim == 5
    fast = solve(problem, seed=4)
    slow = solve_exhaustive(problem)
    direct = max_volume_ellipsoid([intersection(family)])
    assert fast.report.objective_value == pytest.approx(slow.report.objective_value, rel=1e-4)
    assert slow.report.objective_value == pytest.approx(direct.objective_value, rel=1e-4)
    assert len(fast.basis) <= 5
