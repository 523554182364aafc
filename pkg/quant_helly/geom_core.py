"""Bodies, support functions, containment, volumes and the LP kernel.

Every convex set in a family is an H-polytope. Witness bodies (boxes,
zonotopes, ellipsoids, H-convex sets, segments) carry closed-form support
functions, so containment in an H-polytope is one support evaluation per
halfspace.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError
from scipy.special import gamma, ndtr

from .config import (
    CONTAIN_TOL,
    DEGENERATE_WIDTH,
    MAX_DIM,
    MAX_LP_VARS,
    SPD_FLOOR,
    SYMMETRY_TOL,
    VERTEX_TOL,
)
from .errors import (
    DimensionTooLarge,
    DirectionMismatch,
    EmptyBody,
    HalfSphereViolation,
    Infeasible,
    InvalidInput,
    NotSPD,
    NumericalFailure,
    RankDeficientDirections,
    Unbounded,
)

logger = logging.getLogger(__name__)

# Polytope volume and vertex enumeration stop here
MAX_VERTEX_DIM = 3


def as_vec(values, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """
    Coerce to a finite 1-d float array.

    Args:
        values: Array-like of reals
        dim: Expected length, if known
        name: Label for error messages

    Returns:
        A fresh float64 array

    Raises:
        InvalidInput: On wrong shape, wrong length or non-finite entries
    """
    vec = np.array(values, dtype=float).reshape(-1)
    if vec.size < 1 or vec.size > MAX_DIM and dim is None:
        raise InvalidInput(f"{name}: dimension must be in 1..{MAX_DIM} (got: {vec.size})")
    if dim is not None and vec.size != dim:
        raise InvalidInput(f"{name}: expected {dim} coordinates (got: {vec.size})")
    if not np.all(np.isfinite(vec)):
        raise InvalidInput(f"{name}: coordinates must be finite")
    return vec


def _check_dim(dim: int) -> int:
    if not 1 <= dim <= MAX_DIM:
        raise InvalidInput(f"dimension must be in 1..{MAX_DIM} (got: {dim})")
    return int(dim)


def unit_ball_volume(dim: int) -> float:
    """Volume of the Euclidean unit ball in R^dim."""
    return math.pi ** (dim / 2) / gamma(dim / 2 + 1)


# ---------------------------------------------------------------------------
# LP kernel


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True, eq=False)
class LpResult:
    """Outcome of one linear program."""

    status: LpStatus
    value: float
    point: Optional[np.ndarray]

    @property
    def ok(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def raise_for_status(self) -> "LpResult":
        if self.status is LpStatus.INFEASIBLE:
            raise Infeasible("linear program is infeasible")
        if self.status is LpStatus.UNBOUNDED:
            raise Unbounded("linear program is unbounded")
        if self.status is LpStatus.NUMERICAL_FAILURE:
            raise NumericalFailure("linear program failed numerically")
        return self


_LINPROG_STATUS = {
    0: LpStatus.OPTIMAL,
    2: LpStatus.INFEASIBLE,
    3: LpStatus.UNBOUNDED,
}


def lp_solve_arrays(
    objective,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    bounds=None,
    sense: str = "max",
) -> LpResult:
    """
    Solve a dense LP given as arrays.

    Variables are free unless `bounds` says otherwise (scipy's default of
    nonnegative variables is NOT used).

    Args:
        objective: Cost vector c
        A_ub, b_ub: Inequalities A_ub x <= b_ub
        A_eq, b_eq: Equalities A_eq x == b_eq
        bounds: linprog-style bounds; default free
        sense: "max" or "min"

    Returns:
        LpResult with the objective value in the requested sense
    """
    if sense not in ("max", "min"):
        raise InvalidInput(f"sense must be 'max' or 'min' (got: {sense!r})")
    c = np.asarray(objective, dtype=float).reshape(-1)
    sign = -1.0 if sense == "max" else 1.0

    def _rows(A, b):
        if A is None:
            return None, None
        A = np.asarray(A, dtype=float).reshape(-1, c.size)
        if A.shape[0] == 0:
            return None, None
        return A, np.asarray(b, dtype=float).reshape(-1)

    A_ub, b_ub = _rows(A_ub, b_ub)
    A_eq, b_eq = _rows(A_eq, b_eq)
    res = linprog(
        sign * c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds if bounds is not None else (None, None),
        method="highs",
    )
    status = _LINPROG_STATUS.get(res.status, LpStatus.NUMERICAL_FAILURE)
    if status is not LpStatus.OPTIMAL:
        value = math.inf if status is LpStatus.UNBOUNDED else math.nan
        if status is LpStatus.UNBOUNDED and sense == "min":
            value = -math.inf
        return LpResult(status, value, None)
    return LpResult(status, float(sign * res.fun), np.asarray(res.x, dtype=float))


def lp_solve(objective, constraints: Sequence[tuple], sense: str = "max") -> LpResult:
    """
    Solve max/min <objective, x> s.t. <a_i, x> <= b_i for (a_i, b_i) in constraints.

    Raises:
        InvalidInput: If more than MAX_LP_VARS variables
    """
    c = np.asarray(objective, dtype=float).reshape(-1)
    if c.size > MAX_LP_VARS:
        raise InvalidInput(f"lp_solve supports at most {MAX_LP_VARS} variables (got: {c.size})")
    if constraints:
        A = np.array([np.asarray(a, dtype=float).reshape(-1) for a, _ in constraints])
        b = np.array([float(bi) for _, bi in constraints])
    else:
        A, b = None, None
    return lp_solve_arrays(c, A, b, sense=sense)


# ---------------------------------------------------------------------------
# Vertex enumeration


def _dedup_points(points: np.ndarray, tol: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        scale = max(1.0, float(np.max(np.abs(p))))
        if not any(np.max(np.abs(p - q)) <= tol * scale for q in kept):
            kept.append(p)
    if not kept:
        return np.zeros((0, points.shape[1]))
    return np.array(kept)


def enumerate_vertices(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vertices of {Ax <= b} from d-subsets of rows, filtered and deduplicated."""
    m, d = A.shape
    if m < d:
        return np.zeros((0, d))
    combos = np.array(list(combinations(range(m), d)), dtype=int)
    mats = A[combos]
    rhs = b[combos]
    good = np.abs(np.linalg.det(mats)) > 1e-12
    if not np.any(good):
        return np.zeros((0, d))
    pts = np.linalg.solve(mats[good], rhs[good][..., None])[..., 0]
    slack = pts @ A.T - b[None, :]
    feasible = np.all(slack <= VERTEX_TOL * np.maximum(1.0, np.abs(b))[None, :], axis=1)
    pts = pts[feasible]
    if pts.shape[0] == 0:
        return np.zeros((0, d))
    order = np.lexsort(pts.T[::-1])
    return _dedup_points(pts[order], VERTEX_TOL)


def _hull_volume(points: np.ndarray, dim: int) -> float:
    if points.shape[0] < dim + 1:
        return 0.0
    if dim == 1:
        return float(points.max() - points.min())
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        # lower-dimensional point set
        return 0.0


# ---------------------------------------------------------------------------
# Bodies


@dataclass(frozen=True, eq=False)
class Halfspace:
    """{x : <x, normal> <= offset}, stored with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = as_vec(self.normal, name="halfspace normal")
        norm = float(np.linalg.norm(normal))
        if norm == 0.0:
            raise InvalidInput("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", normal / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    @property
    def dim(self) -> int:
        return self.normal.size


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Finite intersection of halfspaces."""

    dim: int
    halfspaces: tuple

    def __post_init__(self):
        _check_dim(self.dim)
        halfspaces = tuple(self.halfspaces)
        for i, hs in enumerate(halfspaces):
            if hs.dim != self.dim:
                raise InvalidInput(f"halfspace {i}: dimension {hs.dim} != {self.dim}")
        object.__setattr__(self, "halfspaces", halfspaces)

    @classmethod
    def from_arrays(cls, A, b) -> "HPolytope":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise InvalidInput(f"{A.shape[0]} normals but {b.size} offsets")
        return cls(A.shape[1], tuple(Halfspace(a, bi) for a, bi in zip(A, b)))

    @classmethod
    def box(cls, lo, hi) -> "HPolytope":
        lo = as_vec(lo, name="box lower corner")
        hi = as_vec(hi, dim=lo.size, name="box upper corner")
        eye = np.eye(lo.size)
        return cls.from_arrays(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    @classmethod
    def regular_polygon(cls, count: int, inradius: float = 1.0, center=(0.0, 0.0),
                        phase: float = 0.0) -> "HPolytope":
        """Polygon with `count` edges tangent to the circle of radius `inradius`."""
        if count < 3:
            raise InvalidInput(f"a polygon needs at least 3 edges (got: {count})")
        center = as_vec(center, dim=2, name="polygon center")
        angles = phase + 2 * np.pi * np.arange(count) / count
        normals = np.column_stack([np.cos(angles), np.sin(angles)])
        return cls.from_arrays(normals, inradius + normals @ center)

    @cached_property
    def A(self) -> np.ndarray:
        if not self.halfspaces:
            return np.zeros((0, self.dim))
        return np.array([hs.normal for hs in self.halfspaces])

    @cached_property
    def b(self) -> np.ndarray:
        return np.array([hs.offset for hs in self.halfspaces], dtype=float)

    @cached_property
    def is_empty(self) -> bool:
        res = lp_solve_arrays(np.zeros(self.dim), self.A, self.b, sense="max")
        if res.status is LpStatus.NUMERICAL_FAILURE:
            raise NumericalFailure("emptiness test failed")
        return res.status is LpStatus.INFEASIBLE

    @cached_property
    def is_bounded(self) -> bool:
        if self.is_empty:
            return True
        for axis in range(self.dim):
            for sign in (1.0, -1.0):
                direction = np.zeros(self.dim)
                direction[axis] = sign
                res = lp_solve_arrays(direction, self.A, self.b, sense="max")
                if res.status is LpStatus.UNBOUNDED:
                    return False
        return True

    @cached_property
    def vertex_array(self) -> np.ndarray:
        if self.dim > MAX_VERTEX_DIM:
            raise DimensionTooLarge(f"vertex enumeration needs d <= {MAX_VERTEX_DIM} (got: {self.dim})")
        if not self.is_bounded:
            raise Unbounded("vertex enumeration on an unbounded polytope")
        if self.is_empty:
            return np.zeros((0, self.dim))
        return enumerate_vertices(self.A, self.b)

    def intersect(self, other: "HPolytope") -> "HPolytope":
        if other.dim != self.dim:
            raise InvalidInput(f"dimension mismatch: {self.dim} vs {other.dim}")
        return HPolytope(self.dim, self.halfspaces + other.halfspaces)

    def support_many(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        if self.is_empty:
            raise EmptyBody("support of an empty polytope")
        if self.dim <= MAX_VERTEX_DIM and self.is_bounded:
            verts = self.vertex_array
            return np.max(U @ verts.T, axis=1)
        out = np.empty(U.shape[0])
        for i, u in enumerate(U):
            res = lp_solve_arrays(u, self.A, self.b, sense="max")
            if res.status is LpStatus.UNBOUNDED:
                raise Unbounded(f"polytope is unbounded in direction {u.tolist()}")
            res.raise_for_status()
            out[i] = res.value
        return out

    def support(self, u) -> float:
        return float(self.support_many(np.asarray(u, dtype=float)[None, :])[0])

    def contains_points(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all(X @ self.A.T <= self.b[None, :] + tol, axis=1)

    def volume(self) -> float:
        if self.dim > MAX_VERTEX_DIM:
            raise DimensionTooLarge(f"polytope volume needs d <= {MAX_VERTEX_DIM} (got: {self.dim})")
        if not self.is_bounded:
            raise Unbounded("volume of an unbounded polytope")
        return _hull_volume(self.vertex_array, self.dim)


@dataclass(frozen=True, eq=False)
class AxisBox:
    """center + [-halfwidths, halfwidths]."""

    center: np.ndarray
    halfwidths: np.ndarray

    def __post_init__(self):
        center = as_vec(self.center, name="box center")
        widths = as_vec(self.halfwidths, dim=center.size, name="box halfwidths")
        if np.any(widths < 0):
            raise InvalidInput("box halfwidths must be nonnegative")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "halfwidths", widths)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.halfwidths <= DEGENERATE_WIDTH))

    def support_many(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        return U @ self.center + np.abs(U) @ self.halfwidths

    def support(self, u) -> float:
        return float(self.support_many(np.asarray(u, dtype=float)[None, :])[0])

    def volume(self) -> float:
        return float(np.prod(2 * self.halfwidths))

    def vertices(self) -> np.ndarray:
        signs = np.array(list(product((-1.0, 1.0), repeat=self.dim)))
        return _dedup_points(self.center + signs * self.halfwidths, VERTEX_TOL)

    def contains_points(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all(np.abs(X - self.center) <= self.halfwidths + tol, axis=1)

    def as_zonotope(self) -> "Zonotope":
        return Zonotope(self.center, np.eye(self.dim), 2 * self.halfwidths)

    def as_hpolytope(self) -> HPolytope:
        return HPolytope.box(self.center - self.halfwidths, self.center + self.halfwidths)


@dataclass(frozen=True, eq=False)
class Zonotope:
    """center + sum_i [-coeffs_i/2, coeffs_i/2] * directions_i, directions unit."""

    center: np.ndarray
    directions: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        center = as_vec(self.center, name="zonotope center")
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if dirs.shape[1] != center.size:
            raise InvalidInput(f"zonotope directions must have {center.size} coordinates")
        if dirs.shape[0] < center.size:
            raise InvalidInput(f"zonotope needs k >= d directions (got: {dirs.shape[0]})")
        coeffs = as_vec(self.coeffs, dim=dirs.shape[0], name="zonotope coeffs")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0):
            raise InvalidInput("zonotope directions must be nonzero")
        if np.any(coeffs < 0):
            raise InvalidInput("zonotope coeffs must be nonnegative")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "directions", dirs / norms[:, None])
        object.__setattr__(self, "coeffs", coeffs * norms)

    @property
    def dim(self) -> int:
        return self.center.size

    @cached_property
    def is_degenerate(self) -> bool:
        return int(np.linalg.matrix_rank(self.directions)) < self.dim

    def support_many(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        return U @ self.center + 0.5 * np.abs(U @ self.directions.T) @ self.coeffs

    def support(self, u) -> float:
        return float(self.support_many(np.asarray(u, dtype=float)[None, :])[0])

    def volume(self) -> float:
        return float(ZonotopeVolume(self.directions, self.dim)(self.coeffs))

    @cached_property
    def _hpolytope(self) -> HPolytope:
        if self.is_degenerate:
            raise RankDeficientDirections("zonotope directions do not span the space")
        d = self.dim
        if d == 1:
            normals = np.array([[1.0], [-1.0]])
        else:
            rows = []
            for subset in combinations(range(self.directions.shape[0]), d - 1):
                sub = self.directions[list(subset)]
                if np.linalg.matrix_rank(sub) < d - 1:
                    continue
                normal = np.linalg.svd(sub)[2][-1]
                rows.extend([normal, -normal])
            normals = np.array(rows)
        return HPolytope.from_arrays(normals, self.support_many(normals))

    def as_hpolytope(self) -> HPolytope:
        return self._hpolytope

    def vertices(self) -> np.ndarray:
        return self._hpolytope.vertex_array

    def contains_points(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self._hpolytope.contains_points(X, tol)


@lru_cache(maxsize=256)
def _zonotope_minors(dir_bytes: bytes, k: int, d: int) -> tuple:
    dirs = np.frombuffer(dir_bytes, dtype=float).reshape(k, d)
    subsets = np.array(list(combinations(range(k), d)), dtype=int)
    minors = np.abs(np.linalg.det(dirs[subsets]))
    return subsets, minors


class ZonotopeVolume:
    """
    Volume of a zonotope as a polynomial in its coefficients.

    vol(alpha) = sum_S |det V_S| prod_{i in S} alpha_i over d-subsets S.
    Also evaluates the gradient and Hessian, which the volume solver needs.
    """

    def __init__(self, directions: np.ndarray, dim: int):
        directions = np.ascontiguousarray(directions, dtype=float)
        k = directions.shape[0]
        self.k = k
        self.dim = dim
        self.subsets, self.minors = _zonotope_minors(directions.tobytes(), k, dim)

    def __call__(self, coeffs: np.ndarray) -> float:
        return float(np.sum(self.minors * np.prod(coeffs[self.subsets], axis=1)))

    def derivatives(self, coeffs: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        k, d = self.k, self.dim
        value = 0.0
        grad = np.zeros(k)
        hess = np.zeros((k, k))
        for subset, minor in zip(self.subsets, self.minors):
            if minor == 0.0:
                continue
            vals = coeffs[subset]
            value += minor * np.prod(vals)
            for a in range(d):
                rest = np.delete(vals, a)
                grad[subset[a]] += minor * np.prod(rest)
                for b in range(a + 1, d):
                    term = minor * np.prod(np.delete(vals, [a, b]))
                    hess[subset[a], subset[b]] += term
                    hess[subset[b], subset[a]] += term
        return value, grad, hess


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """center + shape * B_d with shape symmetric positive definite."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        center = as_vec(self.center, name="ellipsoid center")
        shape = np.asarray(self.shape, dtype=float)
        d = center.size
        if shape.shape != (d, d):
            raise InvalidInput(f"ellipsoid shape must be {d}x{d} (got: {shape.shape})")
        if not np.all(np.isfinite(shape)):
            raise InvalidInput("ellipsoid shape must be finite")
        scale = max(1.0, float(np.max(np.abs(shape))))
        if np.max(np.abs(shape - shape.T)) > SYMMETRY_TOL * scale:
            raise NotSPD("ellipsoid shape must be symmetric")
        shape = 0.5 * (shape + shape.T)
        if np.min(np.linalg.eigvalsh(shape)) <= SPD_FLOOR:
            raise NotSPD("ellipsoid shape must be positive definite")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)

    @property
    def dim(self) -> int:
        return self.center.size

    def support_many(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        return U @ self.center + np.linalg.norm(U @ self.shape, axis=1)

    def support(self, u) -> float:
        return float(self.support_many(np.asarray(u, dtype=float)[None, :])[0])

    def volume(self) -> float:
        return float(np.linalg.det(self.shape) * unit_ball_volume(self.dim))

    def contains_points(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        X = np.atleast_2d(X)
        local = np.linalg.solve(self.shape, (X - self.center).T).T
        return np.linalg.norm(local, axis=1) <= 1.0 + tol

    def boundary_points(self, count: int) -> np.ndarray:
        """Points on the boundary (d=2 only), counterclockwise."""
        if self.dim != 2:
            raise DimensionTooLarge("boundary sampling is only implemented in the plane")
        t = 2 * np.pi * np.arange(count) / count
        return self.center + np.column_stack([np.cos(t), np.sin(t)]) @ self.shape


@lru_cache(maxsize=512)
def _direction_set_ok(hset_bytes: bytes, m: int, d: int) -> bool:
    hset = np.frombuffer(hset_bytes, dtype=float).reshape(m, d)
    if np.linalg.matrix_rank(hset) < d:
        return False
    # max s with sum mu_i h_i = 0, sum mu_i = 1, mu_i >= s
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    A_eq = np.vstack([np.hstack([hset.T, np.zeros((d, 1))]), np.append(np.ones(m), 0.0)])
    b_eq = np.append(np.zeros(d), 1.0)
    bounds = [(0, None)] * m + [(None, 1.0)]
    res = lp_solve_arrays(c, A_ub, np.zeros(m), A_eq, b_eq, bounds, sense="max")
    return res.ok and res.value > 1e-9


def check_direction_set(hset) -> np.ndarray:
    """
    Normalize a direction set H and verify it is not in a closed half-sphere.

    Raises:
        HalfSphereViolation: If the origin is not interior to conv(H)
    """
    hset = np.atleast_2d(np.asarray(hset, dtype=float))
    norms = np.linalg.norm(hset, axis=1)
    if np.any(norms == 0):
        raise InvalidInput("direction set contains a zero vector")
    hset = np.ascontiguousarray(hset / norms[:, None])
    if not _direction_set_ok(hset.tobytes(), *hset.shape):
        raise HalfSphereViolation("direction set lies in a closed half-sphere")
    return hset


@dataclass(frozen=True, eq=False)
class HConvexSet:
    """Intersection of {x : <x, h_i> <= supports_i} over the direction set H."""

    hset: np.ndarray
    supports: np.ndarray

    def __post_init__(self):
        raw = np.atleast_2d(np.asarray(self.hset, dtype=float))
        supports = np.asarray(self.supports, dtype=float).reshape(-1)
        if supports.size != raw.shape[0]:
            raise InvalidInput(f"{raw.shape[0]} directions but {supports.size} support values")
        if not np.all(np.isfinite(supports)):
            raise InvalidInput("support values must be finite")
        _check_dim(raw.shape[1])
        norms = np.linalg.norm(raw, axis=1)
        hset = check_direction_set(raw)
        object.__setattr__(self, "hset", hset)
        object.__setattr__(self, "supports", supports / norms)

    @property
    def dim(self) -> int:
        return self.hset.shape[1]

    @cached_property
    def _hpolytope(self) -> HPolytope:
        return HPolytope.from_arrays(self.hset, self.supports)

    def as_hpolytope(self) -> HPolytope:
        return self._hpolytope

    def support_many(self, U: np.ndarray) -> np.ndarray:
        return self._hpolytope.support_many(U)

    def support(self, u) -> float:
        return self._hpolytope.support(u)

    def volume(self) -> float:
        return self._hpolytope.volume()

    def vertices(self) -> np.ndarray:
        return self._hpolytope.vertex_array

    def contains_points(self, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self._hpolytope.contains_points(X, tol)


@dataclass(frozen=True, eq=False)
class Segment:
    """Closed segment [start, end]."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        start = as_vec(self.start, name="segment start")
        end = as_vec(self.end, dim=start.size, name="segment end")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    @property
    def dim(self) -> int:
        return self.start.size

    @property
    def is_increasing(self) -> bool:
        delta = self.end - self.start
        return bool(np.all(delta >= -VERTEX_TOL) or np.all(delta <= VERTEX_TOL))

    @property
    def l1_length(self) -> float:
        return float(np.sum(np.abs(self.end - self.start)))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    def support_many(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        return np.maximum(U @ self.start, U @ self.end)

    def support(self, u) -> float:
        return float(self.support_many(np.asarray(u, dtype=float)[None, :])[0])

    def volume(self) -> float:
        return 0.0 if self.dim > 1 else self.length

    def vertices(self) -> np.ndarray:
        return _dedup_points(np.array([self.start, self.end]), VERTEX_TOL)


Body = Union[HPolytope, AxisBox, Zonotope, Ellipsoid, HConvexSet, Segment]
WitnessBody = Union[AxisBox, Zonotope, Ellipsoid, HConvexSet, Segment]

POLYTOPAL = (HPolytope, AxisBox, Zonotope, HConvexSet, Segment)


# ---------------------------------------------------------------------------
# Operations


def support(body: Body, direction) -> float:
    """
    Support value max_{x in body} <x, direction>.

    Raises:
        InvalidInput: On a zero direction or dimension mismatch
        Unbounded: HPolytope unbounded in this direction
        EmptyBody: HPolytope is empty
    """
    u = as_vec(direction, dim=body.dim, name="support direction")
    if not np.any(u):
        raise InvalidInput("support direction must be nonzero")
    return body.support(u)


def contains(outer: HPolytope, inner: Body, tol: float = CONTAIN_TOL) -> bool:
    """True iff support(inner, h) <= b + tol for every halfspace (h, b) of outer."""
    if outer.dim != inner.dim:
        raise InvalidInput(f"dimension mismatch: {outer.dim} vs {inner.dim}")
    if not outer.halfspaces:
        return True
    return bool(np.all(inner.support_many(outer.A) <= outer.b + tol))


def containment_margin(outer: HPolytope, inner: Body) -> float:
    """min_j (b_j - support(inner, h_j)); negative means inner sticks out."""
    if not outer.halfspaces:
        return math.inf
    return float(np.min(outer.b - inner.support_many(outer.A)))


def volume(body: Body) -> float:
    """
    Lebesgue volume.

    Raises:
        Unbounded: HPolytope is unbounded
        DimensionTooLarge: Polytope volume for d > 3
    """
    return body.volume()


def vertices(poly: Union[HPolytope, HConvexSet]) -> list[np.ndarray]:
    """
    Vertex list of a bounded polytope (d <= 3).

    Raises:
        Unbounded, DimensionTooLarge
    """
    if isinstance(poly, HConvexSet):
        poly = poly.as_hpolytope()
    return list(poly.vertex_array)


def body_vertices(body: Body) -> np.ndarray:
    """Vertex array of any polytopal body."""
    if isinstance(body, HPolytope):
        return body.vertex_array
    if isinstance(body, POLYTOPAL):
        return body.vertices()
    raise InvalidInput(f"{type(body).__name__} has no vertices")


def diameter(body: Body) -> float:
    """Euclidean diameter (polytopes through their vertices)."""
    if isinstance(body, AxisBox):
        return float(2 * np.linalg.norm(body.halfwidths))
    if isinstance(body, Ellipsoid):
        return float(2 * np.max(np.linalg.eigvalsh(body.shape)))
    verts = body_vertices(body)
    if verts.shape[0] < 2:
        return 0.0
    gaps = verts[:, None, :] - verts[None, :, :]
    return float(np.max(np.linalg.norm(gaps, axis=2)))


def minkowski_combine(a, b, lam: float):
    """
    Parameter-space convex combination lam*a + (1-lam)*b.

    Equals the Minkowski combination whenever the chart is Minkowski-linear
    (always for zonotopes and boxes; for H-convex sets when H is closed
    under Minkowski sums and the support vectors are tight).

    Raises:
        InvalidInput: lam outside [0, 1] or mixed body types
        DirectionMismatch: Different direction sets
    """
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise InvalidInput(f"combination weight must be in [0, 1] (got: {lam})")
    if type(a) is not type(b):
        raise InvalidInput(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if a.dim != b.dim:
        raise InvalidInput(f"dimension mismatch: {a.dim} vs {b.dim}")
    mu = 1.0 - lam
    if isinstance(a, AxisBox):
        return AxisBox(lam * a.center + mu * b.center, lam * a.halfwidths + mu * b.halfwidths)
    if isinstance(a, Zonotope):
        if a.directions.shape != b.directions.shape or not np.allclose(a.directions, b.directions, atol=1e-12):
            raise DirectionMismatch("zonotopes have different directions")
        return Zonotope(lam * a.center + mu * b.center, a.directions, lam * a.coeffs + mu * b.coeffs)
    if isinstance(a, HConvexSet):
        if a.hset.shape != b.hset.shape or not np.allclose(a.hset, b.hset, atol=1e-12):
            raise DirectionMismatch("H-convex sets have different direction sets")
        return HConvexSet(a.hset, lam * a.supports + mu * b.supports)
    raise InvalidInput(f"minkowski_combine does not support {type(a).__name__}")


def dilate(body: Body, factor: float, shift=None) -> Body:
    """shift + factor * body, factor > 0."""
    factor = float(factor)
    if factor <= 0:
        raise InvalidInput(f"dilation factor must be positive (got: {factor})")
    shift = np.zeros(body.dim) if shift is None else as_vec(shift, dim=body.dim, name="shift")
    if isinstance(body, AxisBox):
        return AxisBox(shift + factor * body.center, factor * body.halfwidths)
    if isinstance(body, Zonotope):
        return Zonotope(shift + factor * body.center, body.directions, factor * body.coeffs)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(shift + factor * body.center, factor * body.shape)
    if isinstance(body, HConvexSet):
        return HConvexSet(body.hset, factor * body.supports + body.hset @ shift)
    if isinstance(body, Segment):
        return Segment(shift + factor * body.start, shift + factor * body.end)
    return HPolytope.from_arrays(body.A, factor * body.b + body.A @ shift)


def contains_point(body: Body, x, tol: float = 0.0) -> bool:
    x = as_vec(x, dim=body.dim, name="point")
    return bool(body.contains_points(x[None, :], tol)[0])


def gaussian_measure(body: Body, rng: Optional[np.random.Generator] = None,
                     samples: int = 10**6) -> tuple[float, float]:
    """
    Standard Gaussian measure of a body.

    Exact (error-function product) for AxisBox; Monte Carlo otherwise.

    Returns:
        (value, standard error); the error is 0 for the exact case
    """
    if isinstance(body, AxisBox):
        c, w = body.center, body.halfwidths
        return float(np.prod(ndtr(c + w) - ndtr(c - w))), 0.0
    if isinstance(body, Segment) and body.dim > 1:
        return 0.0, 0.0
    if rng is None:
        rng = np.random.Generator(np.random.Philox(0))
    inside = 0
    remaining = int(samples)
    while remaining > 0:
        batch = min(remaining, 100_000)
        X = rng.standard_normal((batch, body.dim))
        inside += int(np.count_nonzero(body.contains_points(X)))
        remaining -= batch
    p = inside / samples
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)


def intersection(family: Sequence[HPolytope]) -> HPolytope:
    """Single H-polytope for the intersection of a family."""
    if not family:
        raise InvalidInput("family must be nonempty")
    dim = family[0].dim
    halfspaces: tuple = ()
    for i, poly in enumerate(family):
        if poly.dim != dim:
            raise InvalidInput(f"family member {i}: dimension {poly.dim} != {dim}")
        halfspaces += poly.halfspaces
    return HPolytope(dim, halfspaces)


def bounding_box(dim: int, radius: float) -> HPolytope:
    return HPolytope.box(-radius * np.ones(dim), radius * np.ones(dim))


def sphere_directions(dim: int, count: int) -> np.ndarray:
    """
    Quasi-uniform unit directions.

    Equally spaced angles in the plane, a Fibonacci lattice in R^3 and an
    unscrambled Halton sequence pushed through the normal quantile above.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        r = np.sqrt(1 - z**2)
        phi = np.pi * (1 + 5**0.5) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    from scipy.special import ndtri
    from scipy.stats import qmc

    pts = qmc.Halton(dim, scramble=False).random(count + 1)[1:]
    pts = ndtri(np.clip(pts, 1e-12, 1 - 1e-12))
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def hull_distance(point, cloud) -> float:
    """
    Chebyshev distance from a point to the convex hull of a point cloud.

    One LP: min t over convex weights w with |cloud^T w - point|_inf <= t.
    Returns inf if the LP fails.
    """
    cloud = np.atleast_2d(np.asarray(cloud, dtype=float))
    point = np.asarray(point, dtype=float).reshape(-1)
    m, d = cloud.shape
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_ub = np.vstack([
        np.hstack([cloud.T, -np.ones((d, 1))]),
        np.hstack([-cloud.T, -np.ones((d, 1))]),
    ])
    b_ub = np.concatenate([point, -point])
    A_eq = np.append(np.ones(m), 0.0)[None, :]
    res = lp_solve_arrays(c, A_ub, b_ub, A_eq, [1.0], [(0, None)] * (m + 1), sense="min")
    return max(res.value, 0.0) if res.ok else math.inf
