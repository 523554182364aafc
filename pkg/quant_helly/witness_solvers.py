"""
Optimal witness sets inside the intersection of a family of H-polytopes.

Concave objectives (log-volume of boxes, zonotopes, ellipsoids and planar
H-convex sets, Gaussian measure of boxes) go through the barrier engine;
linear surrogates (perimeter, increasing-segment length, translate scale,
H-convex widths, simultaneous approximation) are single LPs. Gaussian
measure of zonotopes, ellipsoids and H-convex sets is a Monte-Carlo
heuristic: Nelder-Mead over the witness parameters, started from the
maximum volume witness.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize
from scipy.special import ndtr

from . import barrier
from .config import CONTAIN_TOL, DEGENERATE_WIDTH, MAX_DIM, SPD_FLOOR
from .errors import (
    DegenerateInput,
    DimensionTooLarge,
    Infeasible,
    InvalidInput,
    NoFiniteEps,
    NumericalFailure,
    RankDeficientDirections,
    Unbounded,
)
from .geom_core import (
    AxisBox,
    Ellipsoid,
    HConvexSet,
    HPolytope,
    LpStatus,
    Segment,
    Zonotope,
    ZonotopeVolume,
    check_direction_set,
    diameter,
    dilate,
    gaussian_measure,
    intersection,
    lp_solve_arrays,
)
from .utils import make_rng

logger = logging.getLogger(__name__)

MAX_ZONOTOPE_DIRECTIONS = 10
MAX_ZONOTOPE_DIM = 3
MAX_APPROX_DIM = 3
EPS_CAP = 2.0**30
EPS_BRACKET = 1e-6
HCONVEX_SWEEP = 180
GAUSSIAN_SAMPLES = 20_000
GAUSSIAN_MAX_EVALS = 400
RETRACT_STEPS = 40


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"


class WitnessClass(str, Enum):
    AXIS_BOX = "AxisBox"
    ZONOTOPE = "Zonotope"
    ELLIPSOID = "Ellipsoid"
    ELLIPSOID_CENTERED = "EllipsoidCentered"
    ELLIPSOID_AXIS_PARALLEL = "EllipsoidAxisParallel"
    HCONVEX = "HConvex"
    TRANSLATE = "Translate"
    INCREASING_SEGMENT = "IncreasingSegment"


class Objective(str, Enum):
    VOLUME = "Volume"
    PERIMETER = "Perimeter"
    TRACE = "Trace"
    DIAMETER = "Diameter"
    GAUSSIAN_MC = "GaussianMC"
    SCALE = "Scale"
    LENGTH = "Length"


class EllipsoidConstraint(str, Enum):
    FREE = "Free"
    CENTERED = "CenteredAtOrigin"
    AXIS_PARALLEL = "AxisParallel"


ALLOWED_OBJECTIVES = {
    WitnessClass.AXIS_BOX: {Objective.VOLUME, Objective.PERIMETER, Objective.GAUSSIAN_MC},
    WitnessClass.ZONOTOPE: {Objective.VOLUME, Objective.GAUSSIAN_MC},
    WitnessClass.ELLIPSOID: {Objective.VOLUME, Objective.TRACE, Objective.GAUSSIAN_MC},
    WitnessClass.ELLIPSOID_CENTERED: {Objective.VOLUME},
    WitnessClass.ELLIPSOID_AXIS_PARALLEL: {Objective.VOLUME},
    WitnessClass.HCONVEX: {Objective.VOLUME, Objective.DIAMETER, Objective.GAUSSIAN_MC},
    WitnessClass.TRANSLATE: {Objective.SCALE},
    WitnessClass.INCREASING_SEGMENT: {Objective.LENGTH},
}


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one witness solve."""

    witness: Optional[object]
    objective_value: float
    status: SolveStatus
    iterations: int = 0
    kkt_residual: float = 0.0
    degenerate: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    def raise_for_status(self) -> "SolveReport":
        if self.status is SolveStatus.INFEASIBLE:
            raise Infeasible("witness problem is infeasible")
        if self.status is SolveStatus.UNBOUNDED:
            raise Unbounded("witness problem is unbounded")
        if self.status is SolveStatus.MAX_ITER:
            raise NumericalFailure(f"solver hit its iteration cap (kkt residual {self.kkt_residual:.3g})")
        return self


def _infeasible() -> SolveReport:
    return SolveReport(None, 0.0, SolveStatus.INFEASIBLE)


def _unbounded() -> SolveReport:
    return SolveReport(None, math.inf, SolveStatus.UNBOUNDED)


@dataclass(frozen=True)
class WitnessProblem:
    """
    A family, a witness class and the objective to maximize.

    Zonotope problems carry `directions`, H-convex problems `hset`,
    translate problems the template `body`.
    """

    family: tuple
    witness_class: WitnessClass
    objective: Objective = Objective.VOLUME
    directions: Optional[np.ndarray] = None
    hset: Optional[np.ndarray] = None
    body: Optional[object] = None

    def __post_init__(self):
        family = tuple(self.family)
        if not family:
            raise InvalidInput("family must be nonempty")
        object.__setattr__(self, "family", family)
        witness_class = WitnessClass(self.witness_class)
        objective = Objective(self.objective)
        object.__setattr__(self, "witness_class", witness_class)
        object.__setattr__(self, "objective", objective)
        if objective not in ALLOWED_OBJECTIVES[witness_class]:
            raise InvalidInput(f"objective {objective.value} is not available for {witness_class.value}")
        if witness_class is WitnessClass.ZONOTOPE and self.directions is None:
            raise InvalidInput("zonotope problems need directions")
        if witness_class is WitnessClass.HCONVEX and self.hset is None:
            raise InvalidInput("H-convex problems need a direction set")
        if witness_class is WitnessClass.TRANSLATE and self.body is None:
            raise InvalidInput("translate problems need a template body")

    @property
    def dim(self) -> int:
        return self.family[0].dim

    def restrict(self, family: Sequence[HPolytope]) -> "WitnessProblem":
        """Same witness question over another family."""
        return WitnessProblem(tuple(family), self.witness_class, self.objective,
                              self.directions, self.hset, self.body)

    def solve(self) -> SolveReport:
        wc, obj = self.witness_class, self.objective
        if wc is WitnessClass.AXIS_BOX:
            if obj is Objective.PERIMETER:
                return max_perimeter_box(self.family)
            if obj is Objective.GAUSSIAN_MC:
                return max_gaussian_box(self.family)
            return max_volume_box(self.family)
        if obj is Objective.GAUSSIAN_MC:
            return max_gaussian_witness(self.family, wc, self.directions, self.hset)
        if wc is WitnessClass.ZONOTOPE:
            return max_volume_zonotope(self.family, self.directions)
        if wc is WitnessClass.ELLIPSOID:
            if obj is Objective.TRACE:
                return max_trace_ellipsoid(self.family)
            return max_volume_ellipsoid(self.family, EllipsoidConstraint.FREE)
        if wc is WitnessClass.ELLIPSOID_CENTERED:
            return max_volume_ellipsoid(self.family, EllipsoidConstraint.CENTERED)
        if wc is WitnessClass.ELLIPSOID_AXIS_PARALLEL:
            return max_volume_ellipsoid(self.family, EllipsoidConstraint.AXIS_PARALLEL)
        if wc is WitnessClass.HCONVEX:
            return max_hconvex(self.family, self.hset, obj)
        if wc is WitnessClass.TRANSLATE:
            return max_translate_scale(self.family, self.body)
        return max_increasing_segment(self.family)


def _intersect(family: Sequence[HPolytope]) -> HPolytope:
    if not family:
        raise InvalidInput("family must be nonempty")
    poly = intersection(list(family))
    if poly.dim > MAX_DIM:
        raise InvalidInput(f"dimension must be at most {MAX_DIM}")
    return poly


def _interior_point(G: np.ndarray, h: np.ndarray):
    """max s s.t. G x + s <= h, s <= 1; the slack s certifies strict feasibility."""
    n = G.shape[1]
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([G, np.ones((G.shape[0], 1))])
    res = lp_solve_arrays(c, A_ub, h, bounds=[(None, None)] * n + [(None, 1.0)], sense="max")
    if res.status is LpStatus.NUMERICAL_FAILURE:
        raise NumericalFailure("interior-point LP failed")
    return res


def _barrier_report(result: barrier.BarrierResult, witness, value: float, **extras) -> SolveReport:
    status = SolveStatus.OPTIMAL if result.converged else SolveStatus.MAX_ITER
    if not result.converged:
        logger.warning("barrier solve stopped early: kkt residual %.3g", result.kkt_residual)
    return SolveReport(witness, value, status, result.iterations, result.kkt_residual, False, extras)


def _neg_log_tail(offset: int) -> barrier.Oracle:
    """-sum log x[offset:]"""

    def oracle(x: np.ndarray):
        tail = x[offset:]
        if np.any(tail <= 0):
            return math.inf, None, None
        grad = np.zeros(x.size)
        grad[offset:] = -1.0 / tail
        hess = np.zeros((x.size, x.size))
        idx = np.arange(offset, x.size)
        hess[idx, idx] = 1.0 / tail**2
        return float(-np.sum(np.log(tail))), grad, hess

    return oracle


# ---------------------------------------------------------------------------
# Boxes


def _box_system(poly: HPolytope) -> tuple[np.ndarray, np.ndarray]:
    """(c, w) containment rows A c + |A| w <= b followed by -w <= 0."""
    d = poly.dim
    G = np.vstack([
        np.hstack([poly.A, np.abs(poly.A)]),
        np.hstack([np.zeros((d, d)), -np.eye(d)]),
    ])
    return G, np.concatenate([poly.b, np.zeros(d)])


def _box_precheck(poly: HPolytope) -> Optional[SolveReport]:
    d = poly.dim
    if not poly.halfspaces:
        return _unbounded()
    G, h = _box_system(poly)
    widest = lp_solve_arrays(np.concatenate([np.zeros(d), np.ones(d)]), G, h, sense="max")
    if widest.status is LpStatus.INFEASIBLE:
        return _infeasible()
    if widest.status is LpStatus.UNBOUNDED:
        return _unbounded()
    widest.raise_for_status()
    return None


def max_volume_box(family: Sequence[HPolytope]) -> SolveReport:
    """
    Largest-volume axis-parallel box in the intersection.

    Maximizes sum log halfwidths subject to <c, h> + <|h|, w> <= b for every
    halfspace (h, b).
    """
    poly = _intersect(family)
    d = poly.dim
    early = _box_precheck(poly)
    if early is not None:
        return early

    G, h = _box_system(poly)
    start = _interior_point(G, h)
    if start.value < -DEGENERATE_WIDTH:
        return _infeasible()
    if start.value <= DEGENERATE_WIDTH:
        box = AxisBox(start.point[:d], np.zeros(d))
        return SolveReport(box, 0.0, SolveStatus.OPTIMAL, 1, 0.0, True)

    result = barrier.minimize(
        start.point[:2 * d],
        _neg_log_tail(d),
        barrier.linear_barrier(G, h),
        theta=G.shape[0],
    )
    box = AxisBox(result.point[:d], result.point[d:])
    return _barrier_report(result, box, box.volume())


def max_perimeter_box(family: Sequence[HPolytope]) -> SolveReport:
    """Axis-parallel box maximizing the side-length sum (one LP)."""
    poly = _intersect(family)
    d = poly.dim
    if not poly.halfspaces:
        return _unbounded()
    G, h = _box_system(poly)
    res = lp_solve_arrays(np.concatenate([np.zeros(d), 2 * np.ones(d)]), G, h, sense="max")
    if res.status is LpStatus.INFEASIBLE:
        return _infeasible()
    if res.status is LpStatus.UNBOUNDED:
        return _unbounded()
    res.raise_for_status()
    box = AxisBox(res.point[:d], np.maximum(res.point[d:], 0.0))
    degenerate = bool(np.all(box.halfwidths <= DEGENERATE_WIDTH))
    return SolveReport(box, float(2 * np.sum(box.halfwidths)), SolveStatus.OPTIMAL, 1, 0.0, degenerate,
                       {"diameter": diameter(box)})


def _gaussian_objective(d: int) -> barrier.Oracle:
    """-sum log(Phi(c+w) - Phi(c-w)) over (c, w)."""

    def oracle(x: np.ndarray):
        c, w = x[:d], x[d:]
        if np.any(w <= 0):
            return math.inf, None, None
        hi, lo = c + w, c - w
        p = ndtr(hi) - ndtr(lo)
        if np.any(p <= 0):
            return math.inf, None, None
        phi_hi = np.exp(-hi**2 / 2) / math.sqrt(2 * math.pi)
        phi_lo = np.exp(-lo**2 / 2) / math.sqrt(2 * math.pi)
        dc = phi_hi - phi_lo
        dw = phi_hi + phi_lo
        dcc = -hi * phi_hi + lo * phi_lo
        dcw = -hi * phi_hi - lo * phi_lo
        grad = np.concatenate([-dc / p, -dw / p])
        hess = np.zeros((2 * d, 2 * d))
        i = np.arange(d)
        hess[i, i] = -dcc / p + dc**2 / p**2
        hess[i + d, i + d] = -dcc / p + dw**2 / p**2
        hess[i, i + d] = hess[i + d, i] = -dcw / p + dc * dw / p**2
        return float(-np.sum(np.log(p))), grad, hess

    return oracle


def max_gaussian_box(family: Sequence[HPolytope]) -> SolveReport:
    """Axis-parallel box of largest standard Gaussian measure (exact objective)."""
    poly = _intersect(family)
    d = poly.dim
    if not poly.halfspaces:
        return _unbounded()
    G, h = _box_system(poly)
    start = _interior_point(G, h)
    if start.status is LpStatus.INFEASIBLE or start.value < -DEGENERATE_WIDTH:
        return _infeasible()
    if start.value <= DEGENERATE_WIDTH:
        box = AxisBox(start.point[:d], np.zeros(d))
        return SolveReport(box, 0.0, SolveStatus.OPTIMAL, 1, 0.0, True)
    x0 = start.point[:2 * d]
    result = barrier.minimize(x0, _gaussian_objective(d), barrier.linear_barrier(G, h), theta=G.shape[0])
    box = AxisBox(result.point[:d], result.point[d:])
    value = float(np.prod(ndtr(box.center + box.halfwidths) - ndtr(box.center - box.halfwidths)))
    return _barrier_report(result, box, value)


# ---------------------------------------------------------------------------
# Zonotopes


def _unit_rows(directions) -> np.ndarray:
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms == 0):
        raise InvalidInput("directions must be nonzero")
    return dirs / norms[:, None]


def _zonotope_system(poly: HPolytope, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(c, alpha) containment rows A c + |A V^T| alpha / 2 <= b followed by -alpha <= 0."""
    d, k = poly.dim, dirs.shape[0]
    return barrier.stack(
        [np.hstack([poly.A, 0.5 * np.abs(poly.A @ dirs.T)]), np.hstack([np.zeros((k, d)), -np.eye(k)])],
        [poly.b, np.zeros(k)],
    )


def max_volume_zonotope(family: Sequence[HPolytope], directions) -> SolveReport:
    """
    Largest-volume zonotope with the given generator directions.

    The volume sum_S |det V_S| prod alpha_S is log-concave in the
    coefficients, so the barrier method finds the global optimum.
    """
    poly = _intersect(family)
    d = poly.dim
    dirs = _unit_rows(directions)
    k = dirs.shape[0]
    if dirs.shape[1] != d:
        raise InvalidInput(f"directions must have {d} coordinates")
    if k < d:
        raise InvalidInput(f"need at least d={d} directions (got: {k})")
    if k > MAX_ZONOTOPE_DIRECTIONS or d > MAX_ZONOTOPE_DIM:
        raise DimensionTooLarge(
            f"zonotope volume supports k <= {MAX_ZONOTOPE_DIRECTIONS}, d <= {MAX_ZONOTOPE_DIM}")
    if np.linalg.matrix_rank(dirs) < d:
        raise RankDeficientDirections("directions do not span the space; volume is identically 0")
    if not poly.halfspaces:
        return _unbounded()

    G, h = _zonotope_system(poly, dirs)
    widest = lp_solve_arrays(np.concatenate([np.zeros(d), np.ones(k)]), G, h, sense="max")
    if widest.status is LpStatus.INFEASIBLE:
        return _infeasible()
    if widest.status is LpStatus.UNBOUNDED:
        return _unbounded()

    start = _interior_point(G, h)
    if start.value < -DEGENERATE_WIDTH:
        return _infeasible()
    if start.value <= DEGENERATE_WIDTH:
        zono = Zonotope(start.point[:d], dirs, np.zeros(k))
        return SolveReport(zono, 0.0, SolveStatus.OPTIMAL, 1, 0.0, True)

    vol = ZonotopeVolume(dirs, d)

    def neg_log_volume(x: np.ndarray):
        alpha = x[d:]
        if np.any(alpha < 0):
            return math.inf, None, None
        value, g, H = vol.derivatives(alpha)
        if value <= 0:
            return math.inf, None, None
        grad = np.zeros(x.size)
        hess = np.zeros((x.size, x.size))
        grad[d:] = -g / value
        hess[d:, d:] = -H / value + np.outer(g, g) / value**2
        return -math.log(value), grad, hess

    result = barrier.minimize(start.point[:d + k], neg_log_volume, barrier.linear_barrier(G, h), theta=G.shape[0])
    zono = Zonotope(result.point[:d], dirs, result.point[d:])
    return _barrier_report(result, zono, zono.volume())


# ---------------------------------------------------------------------------
# Ellipsoids


def _shape_basis(d: int, diagonal: bool) -> np.ndarray:
    """Symmetric basis E_k: e_i e_i^T on the diagonal, e_i e_j^T + e_j e_i^T off it."""
    mats = []
    for i in range(d):
        for j in range(i, d):
            if diagonal and i != j:
                continue
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0
            mats.append(E)
    return np.array(mats)


def _soc_barrier(H: np.ndarray, b: np.ndarray, basis: np.ndarray, n_center: int) -> barrier.Oracle:
    """-sum log(s_j^2 - |A h_j|^2) with s_j = b_j - <a, h_j> > 0."""
    M = np.einsum("pij,mj->mip", basis, H)

    def oracle(z: np.ndarray):
        a, theta = z[:n_center], z[n_center:]
        s = b - H @ a if n_center else b.copy()
        u = M @ theta
        g = s**2 - np.sum(u**2, axis=1)
        if np.any(s <= 0) or np.any(g <= 0):
            return math.inf, None, None
        blocks = [-2 * s[:, None] * H] if n_center else []
        blocks.append(-2 * np.einsum("mip,mi->mp", M, u))
        Dg = np.hstack(blocks)
        inv = 1.0 / g
        grad = -Dg.T @ inv
        hess = (Dg * (inv**2)[:, None]).T @ Dg
        if n_center:
            hess[:n_center, :n_center] -= 2 * (H * inv[:, None]).T @ H
        hess[n_center:, n_center:] += 2 * np.einsum("m,mip,miq->pq", inv, M, M)
        return float(-np.sum(np.log(g))), grad, hess

    return oracle


def _neg_logdet(basis: np.ndarray, n_center: int) -> barrier.Oracle:
    """-log det A(theta)."""

    def oracle(z: np.ndarray):
        A = np.einsum("p,pij->ij", z[n_center:], basis)
        try:
            chol = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            return math.inf, None, None
        logdet = 2 * float(np.sum(np.log(np.diag(chol))))
        Ainv = np.linalg.inv(A)
        B = np.einsum("ij,pjk->pik", Ainv, basis)
        grad = np.zeros(z.size)
        hess = np.zeros((z.size, z.size))
        grad[n_center:] = -np.einsum("pii->p", B)
        hess[n_center:, n_center:] = np.einsum("pij,qji->pq", B, B)
        return -logdet, grad, hess

    return oracle


def _neg_trace(basis: np.ndarray, n_center: int) -> barrier.Oracle:
    traces = np.einsum("pii->p", basis)

    def oracle(z: np.ndarray):
        grad = np.zeros(z.size)
        grad[n_center:] = -traces
        return float(-traces @ z[n_center:]), grad, np.zeros((z.size, z.size))

    return oracle


def _ellipsoid_program(family: Sequence[HPolytope], constraint: EllipsoidConstraint, trace: bool) -> SolveReport:
    poly = _intersect(family)
    d = poly.dim
    if not poly.halfspaces:
        return _unbounded()
    centered = constraint is EllipsoidConstraint.CENTERED
    H, b = poly.A, poly.b

    if centered:
        symmetric = HPolytope.from_arrays(np.vstack([H, -H]), np.concatenate([b, b]))
        if float(np.min(b)) < -DEGENERATE_WIDTH:
            return _infeasible()
        if not symmetric.is_bounded:
            return _unbounded()
        center = np.zeros(d)
        radius = float(np.min(b))
    else:
        if poly.is_empty:
            return _infeasible()
        if not poly.is_bounded:
            return _unbounded()
        start = _interior_point(H, b)
        center, radius = start.point[:d], start.value
        if radius < -DEGENERATE_WIDTH:
            return _infeasible()
    if radius <= DEGENERATE_WIDTH:
        return SolveReport(None, 0.0, SolveStatus.OPTIMAL, 1, 0.0, True, {"center": center.tolist()})

    basis = _shape_basis(d, diagonal=constraint is EllipsoidConstraint.AXIS_PARALLEL)
    n_center = 0 if centered else d
    theta0 = np.array([radius / 2 if np.trace(E) else 0.0 for E in basis])
    z0 = np.concatenate([center[:n_center], theta0])

    soc = _soc_barrier(H, b, basis, n_center)
    if trace:
        objective = _neg_trace(basis, n_center)
        psi = barrier.combine(soc, _neg_logdet(basis, n_center))
        theta = 2 * H.shape[0] + d
    else:
        objective = _neg_logdet(basis, n_center)
        psi = soc
        theta = 2 * H.shape[0]
    result = barrier.minimize(z0, objective, psi, theta=theta)

    a = result.point[:n_center] if n_center else np.zeros(d)
    A = np.einsum("p,pij->ij", result.point[n_center:], basis)
    witness = Ellipsoid(a, A)
    if trace:
        eig = np.linalg.eigvalsh(witness.shape)
        return _barrier_report(result, witness, float(np.trace(witness.shape)),
                               trace=float(np.trace(witness.shape)),
                               axis_length_sum=float(2 * np.sum(eig)))
    return _barrier_report(result, witness, witness.volume())


def max_volume_ellipsoid(family: Sequence[HPolytope],
                         constraint: EllipsoidConstraint = EllipsoidConstraint.FREE) -> SolveReport:
    """Maximum-volume inscribed ellipsoid (optionally centered or axis-parallel)."""
    return _ellipsoid_program(family, EllipsoidConstraint(constraint), trace=False)


def max_trace_ellipsoid(family: Sequence[HPolytope]) -> SolveReport:
    """Inscribed ellipsoid maximizing tr(A), i.e. the sum of semi-axis lengths."""
    return _ellipsoid_program(family, EllipsoidConstraint.FREE, trace=True)


def min_enclosing_ellipsoid(points, tol: float = 1e-7, max_iter: int = 100_000) -> SolveReport:
    """
    Minimum-volume enclosing ellipsoid of a point set.

    Khachiyan's multiplicative-weights iteration with Todd-Yildirim away
    steps on the lifted points (p, 1). The final shape is rescaled so that
    every point is inside and at least one point is on the boundary.

    Raises:
        DegenerateInput: Fewer than d+1 points or affinely dependent points
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = P.shape
    if not 1 <= d <= MAX_DIM:
        raise InvalidInput(f"dimension must be in 1..{MAX_DIM} (got: {d})")
    if not np.all(np.isfinite(P)):
        raise InvalidInput("points must be finite")
    if n < d + 1 or np.linalg.matrix_rank(P - P.mean(axis=0)) < d:
        raise DegenerateInput("points are affinely dependent; the enclosing ellipsoid is flat")

    Q = np.vstack([P.T, np.ones(n)])
    u = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    gap = math.inf
    for iterations in range(1, max_iter + 1):
        X = (Q * u) @ Q.T
        M = np.einsum("ij,ji->i", Q.T, np.linalg.solve(X, Q))
        j = int(np.argmax(M))
        active = np.flatnonzero(u > 0)
        k = int(active[np.argmin(M[active])])
        grow = M[j] / (d + 1) - 1
        shrink = 1 - M[k] / (d + 1)
        gap = max(grow, shrink)
        if gap < tol:
            converged = True
            break
        if grow >= shrink:
            step = (M[j] - d - 1) / ((d + 1) * (M[j] - 1))
            u *= 1 - step
            u[j] += step
        else:
            drop = u[k] / (1 - u[k])
            denom = (d + 1) * (M[k] - 1)
            step = drop if denom <= 0 else min((d + 1 - M[k]) / denom, drop)
            u *= 1 + step
            u[k] -= step
            u[k] = max(u[k], 0.0)

    c = u @ P
    cov = (P * u[:, None]).T @ P - np.outer(c, c)
    shape_sq = d * cov
    local = np.linalg.solve(shape_sq, (P - c).T)
    rho = float(np.max(np.einsum("ij,ji->i", P - c, local)))
    shape_sq *= rho
    eig, vecs = np.linalg.eigh(shape_sq)
    A = (vecs * np.sqrt(eig)) @ vecs.T
    witness = Ellipsoid(c, A)
    status = SolveStatus.OPTIMAL if converged else SolveStatus.MAX_ITER
    return SolveReport(witness, witness.volume(), status, iterations, float(gap), False,
                       {"weights": u.tolist()})


# ---------------------------------------------------------------------------
# Planar H-convex sets


class PlanarHSet:
    """
    A planar direction set sorted by angle, with its edge-length map.

    For a tight support vector lam the edge lengths are L @ lam and the
    area is lam @ L @ lam / 2.
    """

    def __init__(self, hset):
        raw = np.atleast_2d(np.asarray(hset, dtype=float))
        if raw.shape[1] != 2:
            raise DimensionTooLarge("H-convex solvers are implemented in the plane only")
        self.hset = check_direction_set(raw)
        angles = np.mod(np.arctan2(self.hset[:, 1], self.hset[:, 0]), 2 * np.pi)
        self.order = np.argsort(angles, kind="stable")
        self.angles = angles[self.order]
        m = self.angles.size
        gaps = np.diff(np.append(self.angles, self.angles[0] + 2 * np.pi))
        if np.any(gaps <= 1e-12):
            raise InvalidInput("direction set has repeated directions")
        self.gaps = gaps
        inv_sin = 1 / np.sin(gaps)
        cot = np.cos(gaps) * inv_sin
        L = np.zeros((m, m))
        for i in range(m):
            L[i, (i + 1) % m] += inv_sin[i]
            L[(i + 1) % m, i] += inv_sin[i]
            L[i, i] -= cot[i] + cot[i - 1]
        # L in the caller's order
        back = np.empty(m, dtype=int)
        back[self.order] = np.arange(m)
        self.L = L[np.ix_(back, back)]
        self.m = m

    def cone_coeffs(self, g: np.ndarray) -> np.ndarray:
        """mu >= 0 on two adjacent directions with sum mu_i h_i = g."""
        psi = math.atan2(g[1], g[0]) % (2 * math.pi)
        offsets = np.mod(psi - self.angles, 2 * np.pi)
        hits = np.flatnonzero(offsets <= self.gaps + 1e-12)
        i = int(hits[0]) if hits.size else int(np.argmin(offsets - self.gaps))
        nxt = (i + 1) % self.m
        a, b = self.order[i], self.order[nxt]
        pair = np.column_stack([self.hset[a], self.hset[b]])
        coeffs = np.linalg.solve(pair, g)
        mu = np.zeros(self.m)
        mu[a] += max(coeffs[0], 0.0)
        mu[b] += max(coeffs[1], 0.0)
        return mu

    def containment_rows(self, poly: HPolytope) -> np.ndarray:
        return np.array([self.cone_coeffs(h) for h in poly.A])

    def width_row(self, u: np.ndarray) -> np.ndarray:
        return self.cone_coeffs(u) + self.cone_coeffs(-u)


def max_hconvex(family: Sequence[HPolytope], hset, objective: Objective = Objective.VOLUME) -> SolveReport:
    """
    Largest H-convex set (d = 2) by area or by diameter.

    Containment of K(lam) in a halfspace (a, b) is the linear condition
    mu(a) @ lam <= b, valid while lam stays tight (edge lengths >= 0).
    """
    objective = Objective(objective)
    poly = _intersect(family)
    if poly.dim != 2:
        raise DimensionTooLarge("H-convex solvers are implemented in the plane only")
    planar = PlanarHSet(hset)
    m = planar.m
    if not poly.halfspaces or not poly.is_bounded:
        return _unbounded()
    if poly.is_empty:
        return _infeasible()

    G, h = barrier.stack([planar.containment_rows(poly), -planar.L], [poly.b, np.zeros(m)])

    if objective is Objective.DIAMETER:
        return _max_hconvex_diameter(poly, planar, G, h)

    start = _interior_point(G, h)
    if start.value < -DEGENERATE_WIDTH:
        return _infeasible()
    if start.value <= DEGENERATE_WIDTH:
        point = _interior_point(poly.A, poly.b).point[:2]
        witness = HConvexSet(planar.hset, planar.hset @ point)
        return SolveReport(witness, 0.0, SolveStatus.OPTIMAL, 1, 0.0, True)

    L = planar.L

    def neg_log_area(lam: np.ndarray):
        edges = L @ lam
        area = 0.5 * float(lam @ edges)
        if area <= 0:
            return math.inf, None, None
        return -math.log(area), -edges / area, -L / area + np.outer(edges, edges) / area**2

    result = barrier.minimize(start.point[:m], neg_log_area, barrier.linear_barrier(G, h), theta=G.shape[0])
    lam = result.point
    witness = HConvexSet(planar.hset, lam)
    return _barrier_report(result, witness, 0.5 * float(lam @ L @ lam))


def _max_hconvex_diameter(poly: HPolytope, planar: PlanarHSet, G: np.ndarray, h: np.ndarray) -> SolveReport:
    verts = poly.vertex_array
    candidates = [np.array([math.cos(t), math.sin(t)])
                  for t in np.pi * np.arange(HCONVEX_SWEEP) / HCONVEX_SWEEP]
    for p, q in combinations(range(verts.shape[0]), 2):
        gap = verts[q] - verts[p]
        norm = float(np.linalg.norm(gap))
        if norm > 1e-12:
            candidates.append(gap / norm)

    best_value, best_lam, calls = -math.inf, None, 0
    for u in candidates:
        res = lp_solve_arrays(planar.width_row(u), G, h, sense="max")
        calls += 1
        if res.status is LpStatus.INFEASIBLE:
            return _infeasible()
        if not res.ok:
            continue
        if res.value > best_value + 1e-12:
            best_value, best_lam = res.value, res.point
    if best_lam is None:
        raise NumericalFailure("no width LP succeeded")
    witness = HConvexSet(planar.hset, best_lam)
    return SolveReport(witness, diameter(witness), SolveStatus.OPTIMAL, calls, 0.0, False, {
        "width_lower_bound": float(best_value),
        "upper_bound": diameter(poly),
        "certificate": "local",
    })


# ---------------------------------------------------------------------------
# Gaussian measure beyond boxes


@dataclass(frozen=True)
class _Chart:
    """Parameter vector of a witness class with its containment test."""

    start: np.ndarray
    build: Callable[[np.ndarray], object]
    feasible: Callable[[np.ndarray], bool]


def _linear_chart(G: np.ndarray, h: np.ndarray, start: np.ndarray, build) -> _Chart:
    return _Chart(start, build, lambda x: bool(np.all(G @ x <= h + CONTAIN_TOL)))


def _sym(values: np.ndarray, d: int) -> np.ndarray:
    A = np.zeros((d, d))
    A[np.triu_indices(d)] = values
    return A + np.triu(A, 1).T


def _ellipsoid_chart(poly: HPolytope, start: Ellipsoid) -> _Chart:
    d = poly.dim
    H, b = poly.A, poly.b

    def feasible(x: np.ndarray) -> bool:
        A = _sym(x[d:], d)
        if np.min(np.linalg.eigvalsh(A)) <= 10 * SPD_FLOOR:
            return False
        return bool(np.all(H @ x[:d] + np.linalg.norm(H @ A, axis=1) <= b + CONTAIN_TOL))

    x0 = np.concatenate([start.center, start.shape[np.triu_indices(d)]])
    return _Chart(x0, lambda x: Ellipsoid(x[:d], _sym(x[d:], d)), feasible)


def _gaussian_chart(family: Sequence[HPolytope], poly: HPolytope, witness_class: WitnessClass,
                    directions, hset) -> tuple[Optional[_Chart], SolveReport]:
    """Volume-optimal start and its chart; the chart is None when the start is unusable."""
    d = poly.dim
    if witness_class is WitnessClass.ZONOTOPE:
        start = max_volume_zonotope(family, directions)
        if not start.ok or start.degenerate:
            return None, start
        dirs = start.witness.directions
        G, h = _zonotope_system(poly, dirs)
        x0 = np.concatenate([start.witness.center, start.witness.coeffs])
        return _linear_chart(G, h, x0, lambda x: Zonotope(x[:d], dirs, np.maximum(x[d:], 0.0))), start
    if witness_class is WitnessClass.ELLIPSOID:
        start = max_volume_ellipsoid(family)
        if not start.ok or start.witness is None:
            return None, start
        return _ellipsoid_chart(poly, start.witness), start
    if witness_class is WitnessClass.HCONVEX:
        start = max_hconvex(family, hset)
        if not start.ok or start.degenerate:
            return None, start
        planar = PlanarHSet(hset)
        G, h = barrier.stack([planar.containment_rows(poly), -planar.L], [poly.b, np.zeros(planar.m)])
        return _linear_chart(G, h, start.witness.supports, lambda x: HConvexSet(planar.hset, x)), start
    raise InvalidInput(f"Gaussian witness search supports Zonotope, Ellipsoid and HConvex, "
                       f"not {witness_class.value}")


def max_gaussian_witness(family: Sequence[HPolytope], witness_class: WitnessClass, directions=None,
                         hset=None, samples: int = GAUSSIAN_SAMPLES, seed: int = 0,
                         max_evals: int = GAUSSIAN_MAX_EVALS) -> SolveReport:
    """
    Witness of large standard Gaussian measure (heuristic).

    The measure is a Monte Carlo estimate on one fixed Philox sample, so
    every evaluation sees the same points. Nelder-Mead searches the class
    parameters from the volume-optimal witness; each trial point is pulled
    back along the segment to the start until the witness fits. The result
    is contained in the intersection and never scores below the start.
    AxisBox requests go to the exact solver.
    """
    witness_class = WitnessClass(witness_class)
    if witness_class is WitnessClass.AXIS_BOX:
        return max_gaussian_box(family)
    poly = _intersect(family)
    chart, start = _gaussian_chart(family, poly, witness_class, directions, hset)
    if chart is None:
        return start
    x0 = chart.start
    if not chart.feasible(x0):
        logger.warning("volume-optimal start fails the containment test; returning it unchanged")
        return start

    def measure(x: np.ndarray) -> float:
        return gaussian_measure(chart.build(x), make_rng(seed), samples)[0]

    def pull_back(x: np.ndarray) -> np.ndarray:
        if chart.feasible(x):
            return x
        lo, hi = 0.0, 1.0
        for _ in range(RETRACT_STEPS):
            mid = 0.5 * (lo + hi)
            if chart.feasible(x0 + mid * (x - x0)):
                lo = mid
            else:
                hi = mid
        return x0 + lo * (x - x0)

    n = x0.size
    step = 0.1 * max(float(np.max(np.abs(x0))), 1e-3)
    simplex = np.vstack([x0, x0 + step * np.eye(n)])
    res = optimize.minimize(lambda x: -measure(pull_back(x)), x0, method="Nelder-Mead",
                            options={"initial_simplex": simplex, "maxfev": max_evals,
                                     "xatol": 1e-6, "fatol": 0.5 / samples})
    start_value = measure(x0)
    best = pull_back(res.x)
    value = measure(best)
    if value < start_value:
        best, value = x0, start_value
    witness = chart.build(best)
    std_error = gaussian_measure(witness, make_rng(seed), samples)[1]
    logger.debug("gaussian %s: %.6f -> %.6f in %d evaluations", witness_class.value, start_value, value, res.nfev)
    return SolveReport(witness, value, SolveStatus.OPTIMAL, int(res.nfev), 0.0, False, {
        "heuristic": True,
        "samples": int(samples),
        "seed": int(seed),
        "std_error": std_error,
        "start_value": start_value,
        "start_volume": start.objective_value,
    })


# ---------------------------------------------------------------------------
# Linear witnesses


def max_translate_scale(family: Sequence[HPolytope], body) -> SolveReport:
    """
    Largest s >= 0 with a + s*body inside the intersection (one LP).

    The intersection contains a translate of body iff s >= 1.
    """
    poly = _intersect(family)
    if body.dim != poly.dim:
        raise InvalidInput(f"dimension mismatch: {poly.dim} vs {body.dim}")
    d = poly.dim
    if not poly.halfspaces:
        return _unbounded()
    support = body.support_many(poly.A)
    G = np.hstack([poly.A, support[:, None]])
    c = np.zeros(d + 1)
    c[-1] = 1.0
    res = lp_solve_arrays(c, G, poly.b, bounds=[(None, None)] * d + [(0, None)], sense="max")
    if res.status is LpStatus.INFEASIBLE:
        return _infeasible()
    if res.status is LpStatus.UNBOUNDED:
        return _unbounded()
    res.raise_for_status()
    shift, scale = res.point[:d], float(res.point[-1])
    if scale <= DEGENERATE_WIDTH:
        return SolveReport(None, 0.0, SolveStatus.OPTIMAL, 1, 0.0, True, {"translate": shift.tolist()})
    return SolveReport(dilate(body, scale, shift), scale, SolveStatus.OPTIMAL, 1, 0.0, False,
                       {"translate": shift.tolist()})


def max_increasing_segment(family: Sequence[HPolytope]) -> SolveReport:
    """Increasing segment [y, y + delta], delta >= 0, of largest l1 length (one LP)."""
    poly = _intersect(family)
    d = poly.dim
    if not poly.halfspaces:
        return _unbounded()
    A = poly.A
    G = np.vstack([np.hstack([A, np.zeros_like(A)]), np.hstack([A, A])])
    h = np.concatenate([poly.b, poly.b])
    c = np.concatenate([np.zeros(d), np.ones(d)])
    res = lp_solve_arrays(c, G, h, bounds=[(None, None)] * d + [(0, None)] * d, sense="max")
    if res.status is LpStatus.INFEASIBLE:
        return _infeasible()
    if res.status is LpStatus.UNBOUNDED:
        return _unbounded()
    res.raise_for_status()
    start, delta = res.point[:d], np.maximum(res.point[d:], 0.0)
    segment = Segment(start, start + delta)
    return SolveReport(segment, segment.l1_length, SolveStatus.OPTIMAL, 1, 0.0,
                       segment.l1_length <= DEGENERATE_WIDTH, {"l2_length": segment.length})


# ---------------------------------------------------------------------------
# Simultaneous approximation


@dataclass(frozen=True)
class ApproxResult:
    feasible: bool
    witness: Optional[object]
    translate: Optional[np.ndarray]
    eps: float
    lp_calls: int = 1


def _approx_vertices(family: Sequence[HPolytope]) -> np.ndarray:
    if not family:
        raise InvalidInput("family must be nonempty")
    d = family[0].dim
    if d > MAX_APPROX_DIM:
        raise DimensionTooLarge(f"simultaneous approximation needs d <= {MAX_APPROX_DIM} (got: {d})")
    blocks = []
    for i, poly in enumerate(family):
        if not poly.is_bounded:
            raise NoFiniteEps(f"family member {i} is unbounded")
        blocks.append(poly.vertex_array)
    return np.vstack(blocks)


def simultaneous_approx(family: Sequence[HPolytope], witness_class: WitnessClass, eps: float,
                        directions=None) -> ApproxResult:
    """
    Decide whether one a + W satisfies a + W <= K <= a + (1+eps) W for every K.

    W is an origin-centered axis box or zonotope. Inner containment is linear
    in (a, W); outer containment is tested on vertices (a zonotope point is
    a combination sum beta_i v_i with |beta_i| <= (1+eps) alpha_i / 2).
    Solved as one LP.
    """
    if eps < 0:
        raise InvalidInput(f"eps must be nonnegative (got: {eps})")
    witness_class = WitnessClass(witness_class)
    verts = _approx_vertices(family)
    poly = intersection(list(family))
    d = poly.dim
    grow = 1.0 + eps

    if witness_class is WitnessClass.AXIS_BOX:
        dirs = np.eye(d)
    elif witness_class is WitnessClass.ZONOTOPE:
        if directions is None:
            raise InvalidInput("zonotope approximation needs directions")
        dirs = _unit_rows(directions)
        if dirs.shape[1] != d or np.linalg.matrix_rank(dirs) < d:
            raise RankDeficientDirections("directions must span the space")
    else:
        raise InvalidInput(f"simultaneous approximation supports AxisBox and Zonotope, not {witness_class.value}")
    k = dirs.shape[0]
    n_v = verts.shape[0]
    box = witness_class is WitnessClass.AXIS_BOX

    # variables: a (d), params (k), beta (n_v * k) for zonotopes
    n_beta = 0 if box else n_v * k
    n = d + k + n_beta
    spread = np.abs(poly.A) if box else 0.5 * np.abs(poly.A @ dirs.T)
    rows = [np.hstack([poly.A, spread, np.zeros((poly.A.shape[0], n_beta))])]
    rhs = [poly.b]
    A_eq, b_eq = None, None
    if box:
        eye = np.eye(d)
        for v in verts:
            rows.append(np.hstack([-eye, -grow * eye]))
            rhs.append(-v)
            rows.append(np.hstack([eye, -grow * eye]))
            rhs.append(v)
    else:
        eq_rows, eq_rhs = [], []
        for idx, v in enumerate(verts):
            beta = np.zeros((k, n_beta))
            beta[:, idx * k:(idx + 1) * k] = np.eye(k)
            row = np.zeros((d, n))
            row[:, :d] = np.eye(d)
            row[:, d + k:] = dirs.T @ beta
            eq_rows.append(row)
            eq_rhs.append(v)
            half = np.hstack([np.zeros((k, d)), -0.5 * grow * np.eye(k)])
            rows.append(np.hstack([half, beta]))
            rows.append(np.hstack([half, -beta]))
            rhs.extend([np.zeros(k), np.zeros(k)])
        A_eq, b_eq = np.vstack(eq_rows), np.concatenate(eq_rhs)
    bounds = [(None, None)] * d + [(0, None)] * k + [(None, None)] * n_beta
    c = np.zeros(n)
    c[d:d + k] = 1.0
    res = lp_solve_arrays(c, np.vstack(rows), np.concatenate(rhs), A_eq, b_eq, bounds, sense="max")
    if res.status is LpStatus.NUMERICAL_FAILURE:
        raise NumericalFailure("approximation LP failed")
    if not res.ok:
        return ApproxResult(False, None, None, float(eps))
    a = res.point[:d]
    params = np.maximum(res.point[d:d + k], 0.0)
    witness = AxisBox(a, params) if box else Zonotope(a, dirs, params)
    return ApproxResult(True, witness, a, float(eps))


def min_eps_approx(family: Sequence[HPolytope], witness_class: WitnessClass, directions=None,
                   bracket: float = EPS_BRACKET) -> ApproxResult:
    """
    Smallest eps admitting a simultaneous eps-approximation.

    Doubles an upper bound from 1 until feasible, then bisects to a bracket
    narrower than `bracket`; returns the feasible endpoint.

    Raises:
        NoFiniteEps: Unbounded family member, or no eps up to 2^30 works
    """
    calls = 1
    exact = simultaneous_approx(family, witness_class, 0.0, directions)
    if exact.feasible:
        return exact
    lo, hi = 0.0, 1.0
    best = simultaneous_approx(family, witness_class, hi, directions)
    calls += 1
    while not best.feasible:
        lo, hi = hi, 2 * hi
        if hi > EPS_CAP:
            raise NoFiniteEps("no finite approximation factor exists")
        best = simultaneous_approx(family, witness_class, hi, directions)
        calls += 1
    while hi - lo >= bracket:
        mid = 0.5 * (lo + hi)
        trial = simultaneous_approx(family, witness_class, mid, directions)
        calls += 1
        if trial.feasible:
            hi, best = mid, trial
        else:
            lo = mid
    logger.debug("min_eps_approx: eps*=%.9f after %d LPs", hi, calls)
    return ApproxResult(True, best.witness, best.translate, hi, calls)
