"""
Quantitative Tverberg engine.

A chart maps witness bodies to parameter points so that convex combinations
of points decode to bodies inside the convex hull of the decoded inputs.
Running an ordinary Tverberg partition search on the lifted points and
decoding the common point gives one witness inside every part's hull.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import partial
from itertools import islice
from typing import Callable, Iterator, Optional, Sequence

import anyio
import numpy as np

from .config import MAX_PARTITIONS, OBJECTIVE_SLACK, get_thread_limit
from .errors import (
    ContainmentAuditFailed,
    DimensionTooLarge,
    DirectionMismatch,
    InvalidInput,
    NotFound,
    RankDeficientDirections,
    TheoremArityMismatch,
)
from .geom_core import (
    POLYTOPAL,
    AxisBox,
    Ellipsoid,
    HConvexSet,
    Segment,
    Zonotope,
    body_vertices,
    check_direction_set,
    hull_distance,
    lp_solve_arrays,
    sphere_directions,
    unit_ball_volume,
)
from .helly_lab import validate_minkowski_closure
from .utils import body_to_dict
from .witness_solvers import EllipsoidConstraint, max_volume_ellipsoid

logger = logging.getLogger(__name__)

AUDIT_TOL = 1e-6
DECODE_TOL = 1e-7
PG_STEPS = 200
SEARCH_BATCH = 32
CENTER_TOL = 1e-9


class ChartKind(str, Enum):
    ZONOTOPE = "zonotope"
    HCONVEX = "hconvex"
    ELLIPSOID_DET = "ellipsoid-det"
    ELLIPSOID_SUM = "ellipsoid-sum"
    SEGMENT = "segment"


def _sym_vec(A: np.ndarray) -> np.ndarray:
    rows, cols = np.triu_indices(A.shape[0])
    return A[rows, cols]


def _sym_mat(v: np.ndarray, d: int) -> np.ndarray:
    A = np.zeros((d, d))
    rows, cols = np.triu_indices(d)
    A[rows, cols] = v
    A[cols, rows] = v
    return A


# ---------------------------------------------------------------------------
# Charts
#
# Every chart has: dim, kind, reduce, count(r), lift(body), decode(point),
# objective(body). Charts with reduce set keep a hidden last coordinate out
# of the partition search; the decoded value is the min (or max) of its
# per-part combinations.


class ZonotopeChart:
    """(center, generator lengths) in R^{d+k}; axis boxes enter with directions e_i."""

    kind = ChartKind.ZONOTOPE
    reduce = "min"

    def __init__(self, directions):
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0):
            raise InvalidInput("zonotope directions must be nonzero")
        dirs = dirs / norms[:, None]
        if np.linalg.matrix_rank(dirs) < dirs.shape[1]:
            raise RankDeficientDirections("zonotope directions must span the space")
        self.directions = dirs
        self.dim = dirs.shape[1]

    def count(self, r: int) -> int:
        return (r - 1) * (self.directions.shape[0] + self.dim) + 1

    def lift(self, body) -> np.ndarray:
        if isinstance(body, AxisBox):
            body = body.as_zonotope()
        if not isinstance(body, Zonotope):
            raise InvalidInput(f"zonotope chart cannot lift {type(body).__name__}")
        if body.directions.shape != self.directions.shape or not np.allclose(
                body.directions, self.directions, atol=1e-12):
            raise DirectionMismatch("zonotope directions differ from the chart's")
        return np.concatenate([body.center, body.coeffs])

    def decode(self, point) -> Zonotope:
        point = np.asarray(point, dtype=float)
        return Zonotope(point[:self.dim], self.directions, np.maximum(point[self.dim:], 0.0))

    def objective(self, body) -> float:
        return body.volume()


class HConvexChart:
    """Tight support values in R^|H|; H must be closed under Minkowski sums."""

    kind = ChartKind.HCONVEX
    reduce = "min"

    def __init__(self, hset):
        self.hset = check_direction_set(hset)
        self.dim = self.hset.shape[1]
        if not validate_minkowski_closure(self.hset):
            raise InvalidInput("direction set is not closed under Minkowski sums")

    def count(self, r: int) -> int:
        return (r - 1) * self.hset.shape[0] + 1

    def lift(self, body) -> np.ndarray:
        if not isinstance(body, HConvexSet):
            raise InvalidInput(f"H-convex chart cannot lift {type(body).__name__}")
        if body.hset.shape != self.hset.shape or not np.allclose(body.hset, self.hset, atol=1e-12):
            raise DirectionMismatch("H-convex set uses a different direction set")
        return body.as_hpolytope().support_many(self.hset)

    def decode(self, point) -> HConvexSet:
        return HConvexSet(self.hset, np.asarray(point, dtype=float))

    def objective(self, body) -> float:
        return body.volume()


class SegmentChart:
    """
    Increasing segments as (start, end - start) in R^{2d}.

    signs reflects coordinates first, so any fixed orientation class of
    segments can use the chart.
    """

    kind = ChartKind.SEGMENT
    reduce = None

    def __init__(self, dim: int, signs=None):
        self.dim = int(dim)
        self.signs = np.ones(self.dim) if signs is None else np.where(np.asarray(signs) < 0, -1.0, 1.0)

    def count(self, r: int) -> int:
        return 2 * (r - 1) * self.dim + 1

    def lift(self, body) -> np.ndarray:
        if not isinstance(body, Segment):
            raise InvalidInput(f"segment chart cannot lift {type(body).__name__}")
        a, b = self.signs * body.start, self.signs * body.end
        if np.any(b - a < -1e-12):
            if np.any(a - b < -1e-12):
                raise InvalidInput("segment is not increasing in the chart's orientation")
            a, b = b, a
        return np.concatenate([a, np.maximum(b - a, 0.0)])

    def trim(self, body: Segment, length: float) -> Segment:
        """Initial piece of l1 length `length`; equal lengths put lifted points on one hyperplane."""
        if body.l1_length <= 0:
            return body
        scale = max(length, 0.0) / body.l1_length
        return Segment(body.start, body.start + scale * (body.end - body.start))

    def decode(self, point) -> Segment:
        point = np.asarray(point, dtype=float)
        a = point[:self.dim]
        b = a + np.maximum(point[self.dim:], 0.0)
        return Segment(self.signs * a, self.signs * b)

    def objective(self, body) -> float:
        return body.l1_length


class EllipsoidSumChart:
    """
    Origin-centered ellipsoids A B_d with A scaled to entry sum one.

    The lifted point is (A / s, 1 / s) with s = 1^T A 1 > 0; decoding divides
    by the hidden coordinate, and the largest per-part value keeps the
    decoded ellipsoid inside every part.
    """

    kind = ChartKind.ELLIPSOID_SUM
    reduce = "max"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def count(self, r: int) -> int:
        return (r - 1) * (self.dim * (self.dim + 1) // 2) + 1

    def lift(self, body) -> np.ndarray:
        if not isinstance(body, Ellipsoid):
            raise InvalidInput(f"sum-one chart cannot lift {type(body).__name__}")
        if np.max(np.abs(body.center)) > CENTER_TOL:
            raise InvalidInput("sum-one chart needs ellipsoids centered at the origin")
        total = float(np.sum(body.shape))
        return np.append(_sym_vec(body.shape / total), 1.0 / total)

    def decode(self, point) -> Ellipsoid:
        point = np.asarray(point, dtype=float)
        return Ellipsoid(np.zeros(self.dim), _sym_mat(point[:-1], self.dim) / point[-1])

    def objective(self, body) -> float:
        return body.volume()


def det_combination(matrices, weights, target_det: float) -> tuple[np.ndarray, float]:
    """
    C* = sum w_i A_i rescaled to determinant target_det.

    Returns:
        (C, det C*)
    """
    mats = np.asarray(matrices, dtype=float)
    cstar = np.einsum("i,ijk->jk", np.asarray(weights, dtype=float), mats)
    det = float(np.linalg.det(cstar))
    d = cstar.shape[0]
    return cstar * (target_det / det) ** (1.0 / d), det


class EllipsoidDetChart:
    """(center, shape) pairs; decoding rescales the shape to a fixed determinant."""

    kind = ChartKind.ELLIPSOID_DET
    reduce = None

    def __init__(self, dim: int, det: Optional[float] = None):
        self.dim = int(dim)
        self.det = det

    def count(self, r: int) -> int:
        """Witness count for the exact affine search."""
        return (r - 1) * (self.dim * (self.dim + 3) // 2 + 1) + 1

    def min_count(self, r: int) -> int:
        """Witness count of the determinant-one manifold."""
        return (r - 1) * (self.dim * (self.dim + 3) // 2) + 1

    def lift(self, body) -> np.ndarray:
        if not isinstance(body, Ellipsoid):
            raise InvalidInput(f"determinant chart cannot lift {type(body).__name__}")
        return np.concatenate([body.center, _sym_vec(body.shape)])

    def decode(self, point) -> Ellipsoid:
        point = np.asarray(point, dtype=float)
        shape = _sym_mat(point[self.dim:], self.dim)
        if self.det is not None:
            shape, _ = det_combination(shape[None], [1.0], self.det)
        return Ellipsoid(point[:self.dim], shape)

    def objective(self, body) -> float:
        return body.volume()


def make_chart(kind: ChartKind, dim: int, directions=None, hset=None, signs=None):
    kind = ChartKind(kind)
    if kind is ChartKind.ZONOTOPE:
        return ZonotopeChart(np.eye(dim) if directions is None else directions)
    if kind is ChartKind.HCONVEX:
        if hset is None:
            raise InvalidInput("the H-convex chart needs a direction set")
        return HConvexChart(hset)
    if kind is ChartKind.SEGMENT:
        return SegmentChart(dim, signs)
    if kind is ChartKind.ELLIPSOID_SUM:
        return EllipsoidSumChart(dim)
    return EllipsoidDetChart(dim)


# ---------------------------------------------------------------------------
# Partition search


def _partitions(n: int, r: int):
    """
    Labelings of n points with exactly r nonempty parts, as restricted growth
    strings, by increasing part-size imbalance and then lexicographically.
    """
    labels = [0] * n
    counts = [0] * r

    def grow(pos: int, used: int, level: int, cap: int):
        if pos == n:
            if used == r and max(counts) - min(counts) == level:
                yield tuple(labels)
            return
        if r - used > n - pos:
            return
        for label in range(min(used + 1, r)):
            if counts[label] >= cap:
                continue
            labels[pos] = label
            counts[label] += 1
            yield from grow(pos + 1, max(used, label + 1), level, cap)
            counts[label] -= 1

    for level in range(n - r + 1):
        yield from grow(0, 0, level, n // r + level)


def _parts(labels: Sequence[int], r: int) -> tuple:
    return tuple(tuple(i for i, lab in enumerate(labels) if lab == j) for j in range(r))


def _check_budget(n: int, r: int) -> None:
    if r < 2:
        raise InvalidInput(f"r must be at least 2 (got: {r})")
    if n < r:
        raise InvalidInput(f"cannot split {n} points into {r} parts")
    if r**n > MAX_PARTITIONS:
        raise InvalidInput(f"brute-force search needs r^N <= {MAX_PARTITIONS} (got: {r}^{n})")


def _common_point(S: np.ndarray, labels: Sequence[int], r: int, hidden: Optional[np.ndarray] = None,
                  reduce: Optional[str] = None):
    """
    One LP: x and per-part convex weights with sum_{i in P_j} w_i S_i = x.

    With a hidden coordinate the LP also pushes min_j (or max_j) of the
    per-part hidden combinations up (or down).

    Returns:
        (x, weights, hidden value or None), or None if the hulls miss
    """
    n, l = S.shape
    extra = 0 if hidden is None else 1
    nv = l + n + extra
    eq_rows, eq_rhs, ub_rows = [], [], []
    for j in range(r):
        mask = (np.asarray(labels) == j).astype(float)
        block = np.zeros((l, nv))
        block[:, :l] = -np.eye(l)
        block[:, l:l + n] = S.T * mask
        eq_rows.append(block)
        eq_rhs.append(np.zeros(l))
        total = np.zeros(nv)
        total[l:l + n] = mask
        eq_rows.append(total[None, :])
        eq_rhs.append([1.0])
        if hidden is not None:
            row = np.zeros(nv)
            if reduce == "min":
                row[l:l + n] = -hidden * mask
                row[-1] = 1.0
            else:
                row[l:l + n] = hidden * mask
                row[-1] = -1.0
            ub_rows.append(row)
    c = np.zeros(nv)
    if hidden is not None:
        c[-1] = 1.0
    bounds = [(None, None)] * l + [(0, None)] * n + [(None, None)] * extra
    A_ub = np.array(ub_rows) if ub_rows else None
    b_ub = np.zeros(len(ub_rows)) if ub_rows else None
    res = lp_solve_arrays(c, A_ub, b_ub, np.vstack(eq_rows), np.concatenate(eq_rhs), bounds,
                          sense="max" if reduce == "min" else "min")
    if not res.ok:
        return None
    x = res.point[:l]
    weights = np.maximum(res.point[l:l + n], 0.0)
    return x, weights, (float(res.point[-1]) if hidden is not None else None)


async def _first_hit_async(evaluate: Callable, candidates: Iterator) -> tuple[int, Optional[tuple], object]:
    """
    Evaluate candidates in worker batches; the earliest candidate with a
    non-None result wins regardless of completion order.

    Returns:
        (candidates tried, winning labels or None, result)
    """
    limiter = anyio.CapacityLimiter(get_thread_limit())
    tried = 0
    while True:
        batch = list(islice(candidates, SEARCH_BATCH))
        if not batch:
            return tried, None, None
        results: list = [None] * len(batch)

        async def worker(slot: int) -> None:
            results[slot] = await anyio.to_thread.run_sync(evaluate, batch[slot], limiter=limiter)

        async with anyio.create_task_group() as tg:
            for slot in range(len(batch)):
                tg.start_soon(worker, slot)
        for slot, result in enumerate(results):
            if result is not None:
                return tried + slot + 1, batch[slot], result
        tried += len(batch)


def _first_hit(evaluate: Callable, candidates: Iterator) -> tuple[int, Optional[tuple], object]:
    return anyio.run(_first_hit_async, evaluate, candidates)


def _search(lifted: np.ndarray, r: int, reduce: Optional[str]):
    n = lifted.shape[0]
    _check_budget(n, r)
    if reduce:
        S, hidden = lifted[:, :-1], lifted[:, -1]
    else:
        S, hidden = lifted, None
    tried, labels, hit = _first_hit(partial(_common_point, S, r=r, hidden=hidden, reduce=reduce),
                                    _partitions(n, r))
    if labels is None:
        raise NotFound(f"no Tverberg partition among {tried} candidates",
                       {"points": lifted.tolist(), "r": r})
    x, weights, value = hit
    logger.debug("Tverberg partition found after %d candidates", tried)
    point = x if value is None else np.append(x, value)
    return labels, point, weights


def tverberg_points(points, r: int) -> tuple[tuple, np.ndarray]:
    """
    Brute-force Tverberg partition of a point set.

    Returns:
        (partition as r index tuples, common point)

    Raises:
        NotFound: No partition has intersecting hulls
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    labels, point, _ = _search(pts, r, None)
    return _parts(labels, r), point


# ---------------------------------------------------------------------------
# Determinant chart below the affine count


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    return np.maximum(v - css[cond][-1] / rho, 0.0)


def _part_decodes(centers, mats, parts, weights, target):
    decodes = []
    for part, w in zip(parts, weights):
        cstar = np.einsum("i,ijk->jk", w, mats[list(part)])
        det = float(np.linalg.det(cstar))
        scale = (target / det) ** (1.0 / mats.shape[1])
        decodes.append((w @ centers[list(part)], scale * cstar, cstar, scale))
    return decodes


def _discrepancy(decodes) -> tuple[float, float, np.ndarray, np.ndarray]:
    c_bar = np.mean([dc[0] for dc in decodes], axis=0)
    C_bar = np.mean([dc[1] for dc in decodes], axis=0)
    sq = sum(float(np.sum((dc[0] - c_bar) ** 2) + np.sum((dc[1] - C_bar) ** 2)) for dc in decodes)
    worst = max(max(np.max(np.abs(dc[0] - c_bar)), np.max(np.abs(dc[1] - C_bar))) for dc in decodes)
    return sq, float(worst), c_bar, C_bar


def _match_decodes(centers, mats, parts, target):
    """Projected gradient on per-part simplex weights toward equal decoded ellipsoids."""
    d = mats.shape[1]
    weights = [np.full(len(p), 1.0 / len(p)) for p in parts]
    decodes = _part_decodes(centers, mats, parts, weights, target)
    value, worst, c_bar, C_bar = _discrepancy(decodes)
    step = 1.0
    for _ in range(PG_STEPS):
        if worst < DECODE_TOL:
            break
        grads = []
        for part, (c, C, cstar, scale) in zip(parts, decodes):
            inv = np.linalg.inv(cstar)
            g = np.empty(len(part))
            for slot, i in enumerate(part):
                dC = scale * (mats[i] - np.trace(inv @ mats[i]) / d * cstar)
                g[slot] = 2 * np.sum((C - C_bar) * dC) + 2 * (c - c_bar) @ centers[i]
            grads.append(g)
        while step > 1e-12:
            trial = [_project_simplex(w - step * g) for w, g in zip(weights, grads)]
            trial_decodes = _part_decodes(centers, mats, parts, trial, target)
            trial_value, trial_worst, trial_c, trial_C = _discrepancy(trial_decodes)
            if trial_value < value:
                weights, decodes = trial, trial_decodes
                value, worst, c_bar, C_bar = trial_value, trial_worst, trial_c, trial_C
                step *= 2.0
                break
            step *= 0.5
        else:
            break
    return weights, worst, c_bar, C_bar


def _is_prime_power(r: int) -> bool:
    for p in range(2, r + 1):
        if r % p == 0:
            while r % p == 0:
                r //= p
            return r == 1
    return False


def _det_chart_search(witnesses: list, chart: EllipsoidDetChart, r: int):
    n = len(witnesses)
    _check_budget(n, r)
    centers = np.array([w.center for w in witnesses])
    mats = np.array([w.shape for w in witnesses])

    def evaluate(labels):
        parts = _parts(labels, r)
        weights, worst, c_bar, C_bar = _match_decodes(centers, mats, parts, chart.det)
        if worst >= DECODE_TOL:
            return None
        flat = np.zeros(n)
        for part, w in zip(parts, weights):
            flat[list(part)] = w
        return flat, worst, c_bar, C_bar

    tried, labels, hit = _first_hit(evaluate, _partitions(n, r))
    if labels is not None:
        flat, worst, c_bar, C_bar = hit
        shape, _ = det_combination(C_bar[None], [1.0], chart.det)
        return labels, Ellipsoid(c_bar, shape), flat, worst
    prime_power = _is_prime_power(r)
    if not prime_power:
        logger.info("no matching partition for r=%d; r is not a prime power, so this is not a counterexample", r)
    raise NotFound(f"no partition with equal decoded ellipsoids among {tried} candidates",
                   {"r": r, "prime_power": prime_power,
                    "witnesses": [body_to_dict(w) for w in witnesses]})


# ---------------------------------------------------------------------------
# Containment audit and certificates


@dataclass(frozen=True)
class ContainmentAudit:
    """Support gaps (parts x directions) plus exact vertex distances for polytopal witnesses."""

    directions: int
    gaps: np.ndarray
    vertex_gaps: tuple = ()

    @property
    def per_part_min_gap(self) -> list[float]:
        out = []
        for j, row in enumerate(self.gaps):
            gap = float(np.min(row))
            vertex = self.vertex_gaps[j] if j < len(self.vertex_gaps) else None
            # a vertex off the hull overrides a direction set that missed it
            if vertex is not None and vertex > DECODE_TOL:
                gap = min(gap, -vertex)
            out.append(gap)
        return out

    @property
    def min_gap(self) -> float:
        return min(self.per_part_min_gap)

    def to_dict(self) -> dict:
        return {
            "directions": self.directions,
            "per_part_min_gap": self.per_part_min_gap,
            "min_gap": self.min_gap,
            "vertex_distances": list(self.vertex_gaps),
        }


def containment_audit(witness, parts: Sequence[Sequence], directions: Optional[int] = None) -> ContainmentAudit:
    """
    Compare support functions of a witness and each part's hull.

    gap_j(u) = max_{A in part j} h_A(u) - h_witness(u). Polytopal witnesses
    also get the vertex distance to the hull of each polytopal part (LP).
    """
    d = witness.dim
    m = directions or (360 if d == 2 else 1024)
    if m < 64:
        raise InvalidInput(f"containment audit needs at least 64 directions (got: {m})")
    U = sphere_directions(d, m)
    own = witness.support_many(U)
    gaps = np.array([np.max([body.support_many(U) for body in part], axis=0) - own for part in parts])

    vertex_gaps = []
    if isinstance(witness, POLYTOPAL) and d <= 3:
        corners = body_vertices(witness)
        for part in parts:
            if all(isinstance(body, POLYTOPAL) for body in part):
                cloud = np.vstack([body_vertices(body) for body in part])
                vertex_gaps.append(max(hull_distance(v, cloud) for v in corners))
            else:
                vertex_gaps.append(None)
    return ContainmentAudit(U.shape[0], gaps, tuple(vertex_gaps))


@dataclass(frozen=True)
class TverbergCertificate:
    chart: ChartKind
    r: int
    threshold: float
    witnesses: tuple
    partition: tuple
    lifted_common_point: Optional[np.ndarray]
    decoded_witness: object
    objective_value: float
    audit: ContainmentAudit
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        point = self.lifted_common_point
        return {
            "kind": "tverberg-certificate",
            "chart": self.chart.value,
            "r": self.r,
            "threshold": self.threshold,
            "witnesses": [body_to_dict(w) for w in self.witnesses],
            "partition": [list(part) for part in self.partition],
            "lifted_common_point": None if point is None else point.tolist(),
            "decoded_witness": body_to_dict(self.decoded_witness),
            "objective_value": self.objective_value,
            "containment_evidence": self.audit.to_dict(),
            "extras": self.extras,
        }


def quantitative_tverberg(witnesses: Sequence, chart, r: int, threshold: float,
                          audit_directions: Optional[int] = None) -> TverbergCertificate:
    """
    Split witnesses into r parts whose hulls share a witness of objective >= threshold.

    Raises:
        TheoremArityMismatch: Fewer witnesses than the chart's count
        InvalidInput: A witness below the threshold
        NotFound: No partition found, or the decoded witness falls short
        ContainmentAuditFailed: Decoded witness sticks out of a part's hull
    """
    witnesses = list(witnesses)
    n = len(witnesses)
    det_chart = isinstance(chart, EllipsoidDetChart)
    need = chart.min_count(r) if det_chart else chart.count(r)
    if n < need:
        raise TheoremArityMismatch(f"{chart.kind.value} chart with r={r} needs {need} witnesses (got: {n})")
    for i, w in enumerate(witnesses):
        if chart.objective(w) < threshold - OBJECTIVE_SLACK:
            raise InvalidInput(f"witness {i} has objective {chart.objective(w):.9g} below {threshold}")

    extras: dict = {}
    if det_chart and chart.det is None:
        chart = EllipsoidDetChart(chart.dim, min(float(np.linalg.det(w.shape)) for w in witnesses))
    if det_chart and n < chart.count(r):
        labels, decoded, weights, worst = _det_chart_search(witnesses, chart, r)
        point = None
        extras.update(route="projected-gradient", decode_discrepancy=worst, prime_power=_is_prime_power(r))
    else:
        trim = getattr(chart, "trim", None)
        lifted = np.array([chart.lift(trim(w, threshold) if trim else w) for w in witnesses])
        labels, point, weights = _search(lifted, r, chart.reduce)
        decoded = chart.decode(point)
        extras["route"] = "lp"
    extras["weights"] = weights.tolist()

    partition = _parts(labels, r)
    audit = containment_audit(decoded, [[witnesses[i] for i in part] for part in partition], audit_directions)
    if audit.min_gap < -AUDIT_TOL:
        raise ContainmentAuditFailed(f"decoded witness sticks out by {-audit.min_gap:.3g}")
    value = chart.objective(decoded)
    if value < threshold - AUDIT_TOL:
        logger.warning("decoded witness objective %.9g below threshold %.9g", value, threshold)
        raise NotFound("decoded witness falls below the threshold",
                       {"r": r, "chart": chart.kind.value, "witnesses": [body_to_dict(w) for w in witnesses]})
    return TverbergCertificate(chart.kind, r, float(threshold), tuple(witnesses), partition, point,
                               decoded, float(value), audit, extras)


def volume_tverberg(bodies: Sequence, r: int = 2, centered: bool = False,
                    audit_directions: Optional[int] = None) -> TverbergCertificate:
    """
    Tverberg for unit-volume bodies through their largest inscribed ellipsoids.

    Each body's inscribed ellipsoid keeps a d^-d share of its volume
    (d^-d/2 for origin-symmetric bodies with centered=True), and the
    ellipsoid charts carry that bound to the common witness.

    Raises:
        InvalidInput: A body with volume below one
    """
    bodies = list(bodies)
    d = bodies[0].dim
    for i, body in enumerate(bodies):
        vol = body.volume()
        if vol < 1 - 1e-9:
            raise InvalidInput(f"body {i} has volume {vol:.9g} < 1")
    constraint = EllipsoidConstraint.CENTERED if centered else EllipsoidConstraint.FREE
    ellipsoids = [max_volume_ellipsoid([body], constraint).raise_for_status().witness for body in bodies]
    if centered:
        chart = EllipsoidSumChart(d)
        bound = d ** (-d / 2)
    else:
        chart = EllipsoidDetChart(d)
        bound = float(d) ** -d
    cert = quantitative_tverberg(ellipsoids, chart, r, bound * (1 - 1e-4), audit_directions)
    extras = dict(cert.extras, bodies=[body_to_dict(b) for b in bodies], volume_bound=bound)
    return replace(cert, extras=extras)


# ---------------------------------------------------------------------------
# Segment orientation classes and random instances


def orientation_classes(segments: Sequence[Segment]) -> dict[tuple, list[int]]:
    """
    Group segments by the diagonal direction they increase along.

    There are 2^(d-1) classes (a segment and its reversal coincide).
    """
    d = segments[0].dim
    if d > 3:
        raise DimensionTooLarge(f"orientation classes are enumerated for d <= 3 (got: {d})")
    classes: dict[tuple, list[int]] = {}
    for i, seg in enumerate(segments):
        signs = np.where(seg.end - seg.start < 0, -1, 1)
        if signs[0] < 0:
            signs = -signs
        classes.setdefault(tuple(int(s) for s in signs), []).append(i)
    return classes


def largest_orientation_class(segments: Sequence[Segment]) -> tuple[tuple, list[int]]:
    classes = orientation_classes(segments)
    key = max(sorted(classes), key=lambda k: len(classes[k]))
    return key, classes[key]


def random_unit_boxes(count: int, rng: np.random.Generator, dim: int = 2, spread: float = 3.0) -> list[AxisBox]:
    """Axis boxes of volume one with centers uniform in [0, spread]^d."""
    log_w = rng.normal(0.0, 0.4, (count, dim))
    log_w -= log_w.mean(axis=1, keepdims=True)
    centers = rng.uniform(0.0, spread, (count, dim))
    return [AxisBox(c, 0.5 * np.exp(lw)) for c, lw in zip(centers, log_w)]


def random_unit_ellipses(count: int, rng: np.random.Generator, dim: int = 2,
                         spread: float = 3.0) -> list[Ellipsoid]:
    """Ellipsoids of volume one with random axes and orientation."""
    target = 1.0 / unit_ball_volume(dim)
    out = []
    for _ in range(count):
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        log_axes = rng.normal(0.0, 0.4, dim)
        axes = np.exp(log_axes - log_axes.mean()) * target ** (1.0 / dim)
        shape = q @ np.diag(axes) @ q.T
        out.append(Ellipsoid(rng.uniform(0.0, spread, dim), 0.5 * (shape + shape.T)))
    return out
