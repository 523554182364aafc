import math

import numpy as np
import pytest

from quant_helly import barrier
from quant_helly.errors import NumericalFailure


def _linear(c):
    c = np.asarray(c, dtype=float)

    def oracle(x):
        return float(c @ x), c, np.zeros((c.size, c.size))

    return oracle


def test_linear_program_on_square():
    # min x + y over [-1, 1]^2
    G = np.vstack([np.eye(2), -np.eye(2)])
    h = np.ones(4)
    result = barrier.minimize(np.zeros(2), _linear([1.0, 1.0]), barrier.linear_barrier(G, h), theta=4)
    assert result.converged
    np.testing.assert_allclose(result.point, [-1.0, -1.0], atol=1e-6)


def test_log_objective_centers_interval():
    # max log(1 - x) + log(1 + x) is attained at 0
    def neg_log(x):
        s = np.array([1 - x[0], 1 + x[0]])
        if np.any(s <= 0):
            return math.inf, None, None
        grad = np.array([1 / s[0] - 1 / s[1]])
        hess = np.array([[1 / s[0] ** 2 + 1 / s[1] ** 2]])
        return float(-np.sum(np.log(s))), grad, hess

    G, h = barrier.stack([np.array([[1.0]]), np.array([[-1.0]])], [np.array([2.0]), np.array([2.0])])
    result = barrier.minimize(np.array([0.7]), neg_log, barrier.linear_barrier(G, h), theta=2)
    assert result.point[0] == pytest.approx(0.0, abs=1e-6)


def test_infeasible_start_is_rejected():
    G, h = np.eye(1), np.ones(1)
    with pytest.raises(NumericalFailure, match="strictly feasible"):
        barrier.minimize(np.array([2.0]), _linear([1.0]), barrier.linear_barrier(G, h), theta=1)


def test_combine_sums_pieces():
    a = barrier.linear_barrier(np.eye(2), np.ones(2))
    both = barrier.combine(a, a)
    value, grad, hess = both(np.zeros(2))
    single = a(np.zeros(2))
    assert value == pytest.approx(2 * single[0])
    np.testing.assert_allclose(grad, 2 * single[1])
    np.testing.assert_allclose(hess, 2 * single[2])
    assert both(np.array([2.0, 0.0]))[0] == math.inf
