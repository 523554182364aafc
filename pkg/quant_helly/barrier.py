"""Log-barrier interior-point engine shared by the witness solvers.

Minimizes t*f0(x) + psi(x) for an increasing schedule of t, where psi is a
self-concordant barrier of the feasible set. Each piece (objective, barrier)
is a callable returning (value, gradient, hessian) and reports math.inf as
the value outside its domain.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalFailure

logger = logging.getLogger(__name__)

Oracle = Callable[[np.ndarray], tuple[float, np.ndarray, np.ndarray]]

ARMIJO_SIGMA = 0.01
BACKTRACK_BETA = 0.5
T_GROWTH = 5.0          # mu shrinks by 0.2 per outer iteration
DUALITY_TOL = 1e-9
NEWTON_TOL = 1e-10
# Inside this decrement the full Newton step is taken whenever it stays feasible
QUADRATIC_ZONE = 0.1


@dataclass
class BarrierResult:
    point: np.ndarray
    converged: bool
    iterations: int
    kkt_residual: float
    t: float


def linear_barrier(G: np.ndarray, h: np.ndarray) -> Oracle:
    """-sum log(h - G x) for the polyhedron G x <= h."""
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)

    def oracle(x: np.ndarray):
        slack = h - G @ x
        if np.any(slack <= 0):
            return math.inf, None, None
        inv = 1.0 / slack
        grad = G.T @ inv
        hess = (G * (inv**2)[:, None]).T @ G
        return float(-np.sum(np.log(slack))), grad, hess

    return oracle


def combine(*oracles: Oracle) -> Oracle:
    """Pointwise sum of oracles."""

    def oracle(x: np.ndarray):
        total = 0.0
        grad = np.zeros(x.size)
        hess = np.zeros((x.size, x.size))
        for part in oracles:
            val, g, H = part(x)
            if not math.isfinite(val):
                return math.inf, None, None
            total += val
            grad += g
            hess += H
        return total, grad, hess

    return oracle


def _newton_step(grad: np.ndarray, hess: np.ndarray) -> tuple[np.ndarray, float]:
    try:
        step = scipy.linalg.solve(hess, -grad, assume_a="sym", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
    decrement_sq = float(-grad @ step)
    if not np.all(np.isfinite(step)) or decrement_sq < 0:
        # indefinite up to roundoff; fall back to steepest descent
        step = -grad
        decrement_sq = float(grad @ grad)
    return step, decrement_sq


def minimize(
    x0: np.ndarray,
    objective: Oracle,
    barrier: Oracle,
    theta: float,
    t0: float = 1.0,
    max_outer: int = 60,
    max_inner: int = 100,
    duality_tol: float = DUALITY_TOL,
) -> BarrierResult:
    """
    Path-following barrier method from a strictly feasible start.

    Args:
        x0: Strictly feasible starting point
        objective: f0 oracle
        barrier: psi oracle
        theta: Barrier parameter (1 per linear constraint, 2 per second-order
            cone, d per d x d log-det term); theta/t bounds the duality gap
        t0: Initial barrier weight
        max_outer, max_inner: Iteration caps
        duality_tol: Stop once theta/t falls below this

    Returns:
        BarrierResult with kkt_residual = theta/t + last Newton decrement^2

    Raises:
        NumericalFailure: The start is outside the barrier or objective domain
    """
    x = np.array(x0, dtype=float)
    t = float(t0)
    iterations = 0
    decrement_sq = math.inf

    def merit(point: np.ndarray, weight: float):
        f_val, f_grad, f_hess = objective(point)
        b_val, b_grad, b_hess = barrier(point)
        if not (math.isfinite(f_val) and math.isfinite(b_val)):
            return math.inf, None, None
        return weight * f_val + b_val, weight * f_grad + b_grad, weight * f_hess + b_hess

    value, grad, hess = merit(x, t)
    if not math.isfinite(value):
        raise NumericalFailure("barrier start is not strictly feasible")

    for outer in range(max_outer):
        for _ in range(max_inner):
            step, decrement_sq = _newton_step(grad, hess)
            if decrement_sq / 2 <= NEWTON_TOL:
                break
            iterations += 1
            size = 1.0
            slope = float(grad @ step)
            while True:
                trial = x + size * step
                trial_value, trial_grad, trial_hess = merit(trial, t)
                if math.isfinite(trial_value):
                    if decrement_sq < QUADRATIC_ZONE or trial_value <= value + ARMIJO_SIGMA * size * slope:
                        break
                size *= BACKTRACK_BETA
                if size < 1e-14:
                    break
            if size < 1e-14:
                logger.debug("line search stalled at t=%.3g, decrement^2=%.3g", t, decrement_sq)
                break
            x, value, grad, hess = trial, trial_value, trial_grad, trial_hess

        gap = theta / t
        logger.debug("outer %d: t=%.3g gap=%.3g decrement^2=%.3g", outer, t, gap, decrement_sq)
        if gap < duality_tol:
            residual = gap + max(decrement_sq, 0.0)
            return BarrierResult(x, residual < 1e-7, iterations, residual, t)
        t *= T_GROWTH
        value, grad, hess = merit(x, t)

    residual = theta / t + max(decrement_sq, 0.0)
    return BarrierResult(x, False, iterations, residual, t)


def stack(G_blocks: Sequence[np.ndarray], h_blocks: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate inequality blocks G x <= h."""
    return np.vstack(G_blocks), np.concatenate(h_blocks)
