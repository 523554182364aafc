"""
Empirical harness for Helly-type statements.

Premise checkers enumerate subfamilies (or matroid transversals), the
conclusion checker solves the whole family, and the theorem suites feed
both with seeded planted-witness families. A premise that holds together
with a failing conclusion is a theorem-violation candidate: it is logged
at warning level with the full instance and reported, never tolerated.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Callable, Optional, Sequence

import anyio
import numpy as np

from .config import (
    BOUNDING_RADIUS,
    MAX_HELLY_FAMILY,
    MAX_TRANSVERSALS,
    OBJECTIVE_SLACK,
    get_thread_limit,
)
from .errors import (
    InvalidInput,
    SearchExhausted,
    SearchFailed,
    TheoremArityMismatch,
    TooManySubsets,
    TooManyTransversals,
)
from .geom_core import (
    AxisBox,
    Ellipsoid,
    HConvexSet,
    HPolytope,
    Segment,
    Zonotope,
    bounding_box,
    check_direction_set,
    dilate,
    hull_distance,
    lp_solve_arrays,
    unit_ball_volume,
)
from .utils import RNG_NAME, body_to_dict, make_rng, spawn_seeds
from .witness_solvers import (
    EllipsoidConstraint,
    Objective,
    SolveReport,
    SolveStatus,
    WitnessClass,
    WitnessProblem,
    max_volume_ellipsoid,
)

logger = logging.getLogger(__name__)

# Conclusion slack used by the theorem suites
SUITE_SLACK = 1e-6
JOHN_RESIDUAL_TOL = 1e-9
JITTER = 0.1
MAX_SUITE_FAMILY = 12

Measure = Callable[[SolveReport], float]


# ---------------------------------------------------------------------------
# Result types


@dataclass(frozen=True)
class PartitionMatroid:
    """Partition matroid: independent sets meet every class at most once."""

    classes: tuple

    def __post_init__(self):
        classes = tuple(tuple(sorted(int(i) for i in cls)) for cls in self.classes)
        if any(not cls for cls in classes):
            raise InvalidInput("matroid classes must be nonempty")
        flat = sorted(i for cls in classes for i in cls)
        if flat != list(range(len(flat))):
            raise InvalidInput("matroid classes must partition 0..n-1")
        object.__setattr__(self, "classes", classes)

    @classmethod
    def free(cls, n: int) -> "PartitionMatroid":
        """Every element in its own class: all sets are independent."""
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "PartitionMatroid":
        groups: dict[int, list[int]] = {}
        for index, label in enumerate(labels):
            groups.setdefault(int(label), []).append(index)
        return cls(tuple(tuple(groups[key]) for key in sorted(groups)))

    @property
    def size(self) -> int:
        return sum(len(cls) for cls in self.classes)

    def _class_of(self, index: int) -> int:
        for position, cls in enumerate(self.classes):
            if index in cls:
                return position
        raise InvalidInput(f"index {index} is outside the ground set")

    def rank(self, subset: Sequence[int]) -> int:
        """Number of classes the subset meets."""
        return len({self._class_of(i) for i in subset})

    def independent(self, subset: Sequence[int]) -> bool:
        subset = list(subset)
        return len(set(subset)) == len(subset) and self.rank(subset) == len(subset)

    def transversal_count(self) -> int:
        return math.prod(len(cls) for cls in self.classes)

    def transversals(self):
        """Maximal independent sets, one element per class."""
        return product(*self.classes)


@dataclass(frozen=True)
class HellyCheckResult:
    """
    premise_holds is None when the conclusion held and the premise was not
    enumerated (lazy mode).
    """

    premise_holds: Optional[bool]
    conclusion_holds: bool
    violating_subset: Optional[tuple] = None
    witness: Optional[object] = None
    objective_value: float = 0.0

    @property
    def violation(self) -> bool:
        return self.premise_holds is True and not self.conclusion_holds


# ---------------------------------------------------------------------------
# Premise and conclusion checkers


def helly_number(problem: WitnessProblem) -> int:
    """Subfamily size the quantitative Helly theorem needs for this witness class."""
    d = problem.dim
    wc = problem.witness_class
    if wc is WitnessClass.ZONOTOPE:
        return np.atleast_2d(problem.directions).shape[0] + d
    if wc is WitnessClass.ELLIPSOID:
        return d * (d + 3) // 2
    if wc is WitnessClass.ELLIPSOID_CENTERED:
        return d * (d + 1) // 2
    if wc is WitnessClass.HCONVEX:
        return np.atleast_2d(problem.hset).shape[0]
    if wc is WitnessClass.TRANSLATE:
        return d + 1
    # boxes, axis-parallel ellipsoids, increasing segments
    return 2 * d


def _objective(report: SolveReport) -> float:
    return report.objective_value


def _value(report: SolveReport, measure: Measure) -> float:
    if report.status is SolveStatus.INFEASIBLE:
        return -math.inf
    if report.status is SolveStatus.UNBOUNDED:
        return math.inf
    return float(measure(report))


def _solve(problem: WitnessProblem, members: Sequence[HPolytope], clip: bool) -> SolveReport:
    members = list(members)
    if clip:
        members.append(bounding_box(members[0].dim, BOUNDING_RADIUS))
    return problem.restrict(members).solve()


def instance_dump(family: Sequence[HPolytope], **fields) -> dict:
    """JSON-ready record of a family plus whatever context the caller adds."""
    dump = {"family": [body_to_dict(p) for p in family]}
    dump.update(fields)
    return dump


def check_helly(
    family: Sequence[HPolytope],
    k: int,
    problem: WitnessProblem,
    threshold: float,
    *,
    conclusion_threshold: Optional[float] = None,
    measure: Measure = _objective,
    conclusion_measure: Optional[Measure] = None,
    slack: float = OBJECTIVE_SLACK,
    lazy: bool = False,
    clip: bool = False,
) -> HellyCheckResult:
    """
    Check premise and conclusion of a quantitative Helly statement.

    Args:
        family: H-polytopes (at most MAX_HELLY_FAMILY of them)
        k: Subfamily size of the premise
        problem: Witness question; its own family is replaced per subfamily
        threshold: Premise bound on measure(report)
        conclusion_threshold: Bound for the whole family (default: threshold)
        measure, conclusion_measure: Report -> value maps (default: objective)
        slack: Conclusion slack; the premise always uses OBJECTIVE_SLACK
        lazy: Skip premise enumeration when the conclusion holds
        clip: Intersect every solve with the radius-BOUNDING_RADIUS box

    Raises:
        TooManySubsets: Family above the enumeration cap
    """
    family = list(family)
    n = len(family)
    if k < 1 or n < k:
        raise InvalidInput(f"need at least k={k} bodies (got: {n})")
    if n > MAX_HELLY_FAMILY:
        raise TooManySubsets(f"exhaustive enumeration is capped at {MAX_HELLY_FAMILY} bodies (got: {n})")
    goal = threshold if conclusion_threshold is None else conclusion_threshold
    conclusion_measure = conclusion_measure or measure

    full = _solve(problem, family, clip)
    full_value = _value(full, conclusion_measure)
    conclusion = full_value >= goal - slack
    if lazy and conclusion:
        return HellyCheckResult(None, True, None, full.witness, full_value)

    premise, violating = True, None
    for subset in combinations(range(n), k):
        report = _solve(problem, [family[i] for i in subset], clip)
        if _value(report, measure) < threshold - OBJECTIVE_SLACK:
            premise, violating = False, subset
            break

    if premise and not conclusion:
        logger.warning("theorem-violation candidate: %s, k=%d, conclusion %.9g < %.9g",
                       problem.witness_class.value, k, full_value, goal)
    return HellyCheckResult(premise, conclusion, violating, full.witness, full_value)


def check_colorful_helly(
    classes: Sequence[Sequence[HPolytope]],
    problem: WitnessProblem,
    threshold: float,
    *,
    slack: float = SUITE_SLACK,
    clip: bool = False,
) -> tuple[bool, Optional[int]]:
    """
    Colorful variant: every transversal admits the witness, so some class does.

    Returns:
        (premise, index of a class whose intersection admits the witness)

    Raises:
        TheoremArityMismatch: Class count differs from the Helly number
        TooManyTransversals: More than MAX_TRANSVERSALS transversals
    """
    classes = [list(cls) for cls in classes]
    arity = helly_number(problem)
    if len(classes) != arity:
        raise TheoremArityMismatch(
            f"{problem.witness_class.value} in dimension {problem.dim} needs {arity} classes (got: {len(classes)})")
    if any(not cls for cls in classes):
        raise InvalidInput("color classes must be nonempty")
    count = math.prod(len(cls) for cls in classes)
    if count > MAX_TRANSVERSALS:
        raise TooManyTransversals(f"{count} transversals exceed the cap of {MAX_TRANSVERSALS}")

    for pick in product(*classes):
        if _value(_solve(problem, pick, clip), _objective) < threshold - OBJECTIVE_SLACK:
            return False, None
    for index, cls in enumerate(classes):
        if _value(_solve(problem, cls, clip), _objective) >= threshold - slack:
            return True, index
    logger.warning("theorem-violation candidate: colorful %s, no class admits the witness",
                   problem.witness_class.value)
    return True, None


def check_matroid_helly(
    family: Sequence[HPolytope],
    matroid: PartitionMatroid,
    problem: WitnessProblem,
    threshold: float,
    rank_bound: int,
    *,
    slack: float = SUITE_SLACK,
    lazy: bool = False,
    clip: bool = False,
) -> tuple[Optional[bool], Optional[tuple]]:
    """
    Matroid variant: find tau with rank(V - tau) <= rank_bound admitting the witness.

    A valid tau contains every class that V - tau avoids, and growing tau only
    shrinks the intersection, so the unions of (#classes - rank_bound) full
    classes are the complete candidate list.

    Returns:
        (premise, tau); premise is None when lazy and tau was found

    Raises:
        TooManyTransversals: Independent-set enumeration above the cap
        SearchExhausted: Premise holds but no tau works (carries the instance)
    """
    family = list(family)
    if matroid.size != len(family):
        raise InvalidInput(f"matroid ground set has {matroid.size} elements, family has {len(family)}")
    count = matroid.transversal_count()
    if count > MAX_TRANSVERSALS:
        raise TooManyTransversals(f"{count} independent sets exceed the cap of {MAX_TRANSVERSALS}")

    tau = _search_tau(family, matroid, problem, threshold - slack, rank_bound, clip)
    if lazy and tau is not None:
        return None, tau

    premise = all(
        _value(_solve(problem, [family[i] for i in pick], clip), _objective) >= threshold - OBJECTIVE_SLACK
        for pick in matroid.transversals()
    )
    if premise and tau is None:
        logger.warning("theorem-violation candidate: matroid %s, rank bound %d",
                       problem.witness_class.value, rank_bound)
        raise SearchExhausted(
            f"no tau with rank(V - tau) <= {rank_bound} admits the witness",
            instance_dump(family, classes=[list(c) for c in matroid.classes],
                          threshold=threshold, rank_bound=rank_bound,
                          witness_class=problem.witness_class.value),
        )
    return premise, tau


def _search_tau(family, matroid: PartitionMatroid, problem: WitnessProblem, goal: float,
                rank_bound: int, clip: bool) -> Optional[tuple]:
    n_classes = len(matroid.classes)
    if n_classes <= rank_bound:
        return ()
    for chosen in combinations(range(n_classes), n_classes - rank_bound):
        tau = tuple(sorted(i for c in chosen for i in matroid.classes[c]))
        if _value(_solve(problem, [family[i] for i in tau], clip), _objective) >= goal:
            return tau
    return None


class DiameterVariant(str, Enum):
    BOX = "BoxDiameter"
    INCREASING = "IncreasingDiameter"
    HCONVEX = "HConvexDiameter"


def check_diameter_theorems(
    family: Sequence[HPolytope],
    k: int,
    variant: DiameterVariant,
    hset=None,
    *,
    lazy: bool = False,
    clip: bool = False,
) -> HellyCheckResult:
    """
    Diameter statements through linear surrogates.

    Premise: every k-subfamily has a witness of surrogate size >= 1 (side sum
    of a box, l1 length of an increasing segment, H-convex diameter).
    Conclusion: the whole family has a witness of Euclidean diameter at least
    d^-1/2 (boxes, segments) or |H|^-1/2 (H-convex sets).

    Raises:
        TheoremArityMismatch: k below the theorem's subfamily size
        InvalidInput: H fails the Minkowski-closure audit
    """
    variant = DiameterVariant(variant)
    family = list(family)
    d = family[0].dim
    if variant is DiameterVariant.BOX:
        problem = WitnessProblem(tuple(family), WitnessClass.AXIS_BOX, Objective.PERIMETER)
        arity, guarantee = 2 * d, d**-0.5

        def conclusion_measure(report):
            return report.extras["diameter"]

    elif variant is DiameterVariant.INCREASING:
        problem = WitnessProblem(tuple(family), WitnessClass.INCREASING_SEGMENT, Objective.LENGTH)
        arity, guarantee = 2 * d, d**-0.5

        def conclusion_measure(report):
            return report.extras["l2_length"]

    else:
        if hset is None:
            raise InvalidInput("the H-convex diameter theorem needs a direction set")
        if not validate_minkowski_closure(hset):
            raise InvalidInput("direction set is not closed under Minkowski sums")
        problem = WitnessProblem(tuple(family), WitnessClass.HCONVEX, Objective.DIAMETER, hset=hset)
        arity = np.atleast_2d(hset).shape[0]
        guarantee = arity**-0.5
        conclusion_measure = _objective

    if k < arity:
        raise TheoremArityMismatch(f"{variant.value} in dimension {d} needs k >= {arity} (got: {k})")
    return check_helly(family, k, problem, 1.0, conclusion_threshold=guarantee,
                       conclusion_measure=conclusion_measure, lazy=lazy, clip=clip)


def inflate(family: Sequence[HPolytope], eps: float) -> list[HPolytope]:
    """Minkowski sum of every body with eps times the unit ball."""
    return [HPolytope.from_arrays(p.A, p.b + eps) for p in family]


# ---------------------------------------------------------------------------
# Instance generators


class FamilyKind(str, Enum):
    TANGENT = "tangent-halfspaces"
    POLYTOPES = "random-polytope-intersections"
    SLABS = "shifted-slabs"


@dataclass(frozen=True)
class FamilySpec:
    """
    Recipe for a family with a planted common witness.

    planted defaults to the unit disc for tangent halfspaces and to the
    cube [-1/2, 1/2]^d otherwise. overlap scales the slab widths (0 gives
    hyperplanes through the planted center).
    """

    kind: FamilyKind
    size: int
    dim: int = 2
    planted: Optional[object] = None
    facets: int = 4
    slack: float = 0.2
    overlap: float = 1.0

    def planted_body(self):
        if self.planted is not None:
            return self.planted
        if FamilyKind(self.kind) is FamilyKind.TANGENT:
            return Ellipsoid(np.zeros(self.dim), np.eye(self.dim))
        return AxisBox(np.zeros(self.dim), np.full(self.dim, 0.5))


def _unit_normals(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    U = rng.standard_normal((count, dim))
    return U / np.linalg.norm(U, axis=1)[:, None]


def _center_of(body) -> np.ndarray:
    if isinstance(body, Segment):
        return 0.5 * (body.start + body.end)
    if isinstance(body, HConvexSet):
        return body.vertices().mean(axis=0)
    return body.center


def random_polytope_around(planted, rng: np.random.Generator, facets: int = 4,
                           slack: float = 0.2) -> HPolytope:
    """Random halfspaces whose intersection contains the planted body."""
    U = _unit_normals(rng, facets, planted.dim)
    return HPolytope.from_arrays(U, planted.support_many(U) + rng.uniform(0.0, slack, facets))


def random_family(spec: FamilySpec, seed: int) -> list[HPolytope]:
    """Deterministic family for (spec, seed); every member contains spec.planted_body()."""
    kind = FamilyKind(spec.kind)
    planted = spec.planted_body()
    rng = make_rng(seed)
    d = planted.dim
    if kind is FamilyKind.TANGENT:
        U = _unit_normals(rng, spec.size, d)
        offsets = planted.support_many(U)
        return [HPolytope.from_arrays(u[None, :], [h]) for u, h in zip(U, offsets)]
    if kind is FamilyKind.POLYTOPES:
        return [random_polytope_around(planted, rng, spec.facets, spec.slack) for _ in range(spec.size)]

    center = _center_of(planted)
    family = []
    for u in _unit_normals(rng, spec.size, d):
        mid = float(u @ center)
        upper = mid + spec.overlap * (planted.support(u) - mid)
        lower = mid - spec.overlap * (mid + planted.support(-u))
        family.append(HPolytope.from_arrays([u, -u], [upper, -lower]))
    return family


# ---------------------------------------------------------------------------
# Minkowski closure of H


def _random_hconvex(hset: np.ndarray, rng: np.random.Generator) -> HConvexSet:
    points = rng.standard_normal((hset.shape[1] + 3, hset.shape[1]))
    return HConvexSet(hset, np.max(hset @ points.T, axis=1))


def validate_minkowski_closure(hset, trials: int = 20, seed: int = 0, tol: float = 1e-7) -> bool:
    """
    Audit that H-convex sets stay H-convex under Minkowski sums.

    For random pairs A, B the set {x : Hx <= h_A + h_B} is intersected back
    from the summed supports; each of its vertices must lie in A + B.
    """
    hset = check_direction_set(hset)
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        a, b = _random_hconvex(hset, rng), _random_hconvex(hset, rng)
        summed = HConvexSet(hset, a.supports + b.supports)
        cloud = (a.vertices()[:, None, :] + b.vertices()[None, :, :]).reshape(-1, hset.shape[1])
        for v in summed.vertices():
            worst = max(worst, hull_distance(v, cloud))
    logger.debug("Minkowski closure audit: worst vertex gap %.3g", worst)
    return worst <= tol


# ---------------------------------------------------------------------------
# Sharpness of the ellipsoid Helly number


def _john_system(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Columns u_i (x) u_i (upper triangle) stacked over u_i; rhs (I, 0)."""
    d = U.shape[1]
    rows, cols = np.triu_indices(d)
    M = np.vstack([(U[:, rows] * U[:, cols]).T, U.T])
    rhs = np.concatenate([np.eye(d)[rows, cols], np.zeros(d)])
    return M, rhs


def _john_residuals(U: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    identity = np.einsum("i,ij,ik->jk", weights, U, U) - np.eye(U.shape[1])
    centroid = weights @ U
    return float(np.max(np.abs(identity))), float(np.max(np.abs(centroid)))


def _decomposes(U: np.ndarray, subset: tuple) -> bool:
    """Does the identity decompose over the contact points in subset?"""
    M, rhs = _john_system(U)
    cols = list(subset)
    res = lp_solve_arrays(np.zeros(len(cols)), A_eq=M[:, cols], b_eq=rhs,
                          bounds=[(0, None)] * len(cols), sense="min")
    return res.ok


def _critical(U: np.ndarray) -> list[tuple]:
    """Proper subsets (of size n-1) over which the identity still decomposes."""
    n = U.shape[0]
    return [s for s in combinations(range(n), n - 1) if _decomposes(U, s)]


def _pentagon(n: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(t), np.sin(t)])


def john_counterexample(d: int = 2, seed: int = 0, max_restarts: int = 10_000,
                        measure: bool = True) -> tuple[list[HPolytope], dict]:
    """
    d(d+3)/2 tangent halfspaces of the unit disc with a critical John decomposition.

    The unit disc is the largest ellipse in their intersection, while every
    proper subfamily admits a strictly larger one, so d(d+3)/2 - 1 sets do
    not suffice for the ellipsoid Helly theorem.

    Args:
        d: Dimension (only 2 is implemented)
        seed: Seed for the random-restart fallback
        max_restarts: Fallback budget
        measure: Also compute the ellipse areas recorded in the certificate

    Returns:
        (family, certificate dict)

    Raises:
        SearchFailed: No critical configuration within max_restarts
    """
    if d != 2:
        raise InvalidInput(f"the counterexample construction is implemented for d=2 (got: {d})")
    n = d * (d + 3) // 2
    U = _pentagon(n)
    weights = np.full(n, d / n)
    source, restarts = "regular-polygon", 0
    decomposing = _critical(U)

    if decomposing:
        logger.info("regular polygon is not critical, falling back to random restarts")
        rng = make_rng(seed)
        for restarts in range(1, max_restarts + 1):
            angles = np.sort(rng.uniform(0.0, 2 * np.pi, n))
            U = np.column_stack([np.cos(angles), np.sin(angles)])
            M, rhs = _john_system(U)
            try:
                weights = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                continue
            if np.min(weights) <= 0 or max(_john_residuals(U, weights)) > JOHN_RESIDUAL_TOL:
                continue
            decomposing = _critical(U)
            if not decomposing:
                source = "random-restart"
                break
        else:
            raise SearchFailed(f"no critical contact configuration after {max_restarts} restarts")

    identity_residual, centroid_residual = _john_residuals(U, weights)
    family = [HPolytope.from_arrays(u[None, :], [1.0]) for u in U]
    certificate = {
        "d": d,
        "source": source,
        "restarts": restarts,
        "directions": U.tolist(),
        "weights": weights.tolist(),
        "identity_residual": identity_residual,
        "centroid_residual": centroid_residual,
        "audited_subsets": [list(s) for s in combinations(range(n), n - 1)],
        "decomposing_subsets": [list(s) for s in decomposing],
    }
    if measure:
        clip = bounding_box(d, BOUNDING_RADIUS)
        full = max_volume_ellipsoid(family + [clip], EllipsoidConstraint.FREE).raise_for_status()
        areas = []
        for subset in combinations(range(n), n - 1):
            report = max_volume_ellipsoid([family[i] for i in subset] + [clip], EllipsoidConstraint.FREE)
            areas.append({"subset": list(subset), "area": report.raise_for_status().objective_value})
        disc = unit_ball_volume(d)
        certificate["full_area"] = full.objective_value
        certificate["subset_areas"] = areas
        certificate["min_subset_gap"] = min(a["area"] for a in areas) - disc
    return family, certificate


# ---------------------------------------------------------------------------
# Theorem suites

THEOREMS = ("box", "zonotope", "ellipsoid", "hconvex", "axis-ellipsoid", "centered",
            "translate", "box-diam", "incr-diam")


@dataclass(frozen=True)
class _SuiteSetup:
    planted: object
    arity: int
    witness_class: Optional[WitnessClass] = None
    directions: Optional[np.ndarray] = None
    hset: Optional[np.ndarray] = None
    body: Optional[object] = None
    variant: Optional[DiameterVariant] = None

    def planted_value(self) -> float:
        if self.witness_class is WitnessClass.TRANSLATE:
            return 1.0
        return self.planted.volume()


def _hexagon() -> np.ndarray:
    t = 2 * np.pi * np.arange(6) / 6
    return np.column_stack([np.cos(t), np.sin(t)])


def _suite_setup(theorem: str, d: int) -> _SuiteSetup:
    origin = np.zeros(d)
    if theorem == "box":
        return _SuiteSetup(AxisBox(origin, np.full(d, 0.5)), 2 * d, WitnessClass.AXIS_BOX)
    if theorem == "zonotope":
        directions = np.vstack([np.eye(d), np.ones(d) / math.sqrt(d)])
        planted = Zonotope(origin, directions, np.full(d + 1, 0.5))
        return _SuiteSetup(planted, directions.shape[0] + d, WitnessClass.ZONOTOPE, directions=directions)
    if theorem == "ellipsoid":
        return _SuiteSetup(Ellipsoid(origin, 0.5 * np.eye(d)), d * (d + 3) // 2, WitnessClass.ELLIPSOID)
    if theorem == "hconvex":
        if d != 2:
            raise InvalidInput("the H-convex suite runs in the plane")
        hset = _hexagon()
        return _SuiteSetup(HConvexSet(hset, np.full(6, 0.5)), 6, WitnessClass.HCONVEX, hset=hset)
    if theorem == "axis-ellipsoid":
        axes = np.linspace(0.6, 0.4, d)
        return _SuiteSetup(Ellipsoid(origin, np.diag(axes)), 2 * d, WitnessClass.ELLIPSOID_AXIS_PARALLEL)
    if theorem == "centered":
        return _SuiteSetup(Ellipsoid(origin, 0.5 * np.eye(d)), d * (d + 1) // 2, WitnessClass.ELLIPSOID_CENTERED)
    if theorem == "translate":
        template = Ellipsoid(origin, 0.5 * np.eye(d))
        return _SuiteSetup(dilate(template, 1.0, np.full(d, 0.25)), d + 1, WitnessClass.TRANSLATE, body=template)
    if theorem == "box-diam":
        planted = AxisBox(origin, np.full(d, 0.5 / math.sqrt(d)))
        return _SuiteSetup(planted, 2 * d, variant=DiameterVariant.BOX)
    if theorem == "incr-diam":
        half = np.full(d, 0.5 / math.sqrt(d))
        return _SuiteSetup(Segment(-half, half), 2 * d, variant=DiameterVariant.INCREASING)
    raise InvalidInput(f"unknown theorem {theorem!r} (choose from {', '.join(THEOREMS)})")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    seed: int
    size: int
    premise_holds: Optional[bool]
    conclusion_holds: bool
    conclusion_value: float
    instance: Optional[dict] = None

    @property
    def violation(self) -> bool:
        return self.instance is not None

    def to_dict(self) -> dict:
        value = self.conclusion_value
        return {
            "trial": self.trial,
            "seed": self.seed,
            "size": self.size,
            "premise_holds": self.premise_holds,
            "conclusion_holds": self.conclusion_holds,
            "conclusion_value": value if math.isfinite(value) else None,
            "instance": self.instance,
        }


def run_trial(theorem: str, d: int, trial: int, seed: int) -> TrialOutcome:
    """One seeded instance of a theorem suite."""
    setup = _suite_setup(theorem, d)
    rng = make_rng(seed)
    if theorem == "ellipsoid":
        size = int(rng.integers(setup.arity + 1, 11))
    else:
        size = int(rng.integers(setup.arity + 1, min(setup.arity + 4, MAX_SUITE_FAMILY) + 1))
    kind = FamilyKind.TANGENT if rng.random() < 0.5 else FamilyKind.POLYTOPES
    spec = FamilySpec(kind, size, d, setup.planted, facets=d + 1)
    family = random_family(spec, int(rng.integers(2**63)))
    family = [dilate(p, 1.0, rng.normal(0.0, JITTER, d)) if rng.random() < 0.5 else p for p in family]

    context = {"theorem": theorem, "trial": trial, "seed": seed, "k": setup.arity}
    if setup.variant is not None:
        result = check_diameter_theorems(family, setup.arity, setup.variant, lazy=True, clip=True)
        context["threshold"] = 1.0
    else:
        problem = WitnessProblem(tuple(family), setup.witness_class, directions=setup.directions,
                                 hset=setup.hset, body=setup.body,
                                 objective=Objective.SCALE if setup.body is not None else Objective.VOLUME)
        threshold = setup.planted_value() * float(rng.uniform(0.7, 1.0))
        context["threshold"] = threshold
        if theorem == "ellipsoid":
            labels = np.arange(size) % 6
            matroid = PartitionMatroid.from_labels(rng.permutation(labels))
            try:
                premise, tau = check_matroid_helly(family, matroid, problem, threshold, setup.arity - 1,
                                                   lazy=True, clip=True)
            except SearchExhausted as exc:
                return TrialOutcome(trial, seed, size, True, False, -math.inf, {**context, **exc.instance})
            return TrialOutcome(trial, seed, size, premise, tau is not None, math.nan)
        result = check_helly(family, setup.arity, problem, threshold, slack=SUITE_SLACK, lazy=True, clip=True)

    instance = instance_dump(family, **context) if result.violation else None
    return TrialOutcome(trial, seed, size, result.premise_holds, result.conclusion_holds,
                        result.objective_value, instance)


@dataclass(frozen=True)
class SuiteReport:
    theorem: str
    dim: int
    trials: int
    seed: int
    outcomes: tuple = field(default_factory=tuple)

    @property
    def violations(self) -> list[TrialOutcome]:
        return [o for o in self.outcomes if o.violation]

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "d": self.dim,
            "trials": self.trials,
            "seed": self.seed,
            "rng": RNG_NAME,
            "summary": {
                "conclusion_held": sum(o.conclusion_holds for o in self.outcomes),
                "premise_failed": sum(o.premise_holds is False for o in self.outcomes),
                "violations": len(self.violations),
            },
            "outcomes": [o.to_dict() for o in self.outcomes],
        }


async def run_suite_async(theorem: str, d: int = 2, trials: int = 200, seed: int = 0) -> SuiteReport:
    """
    Run a theorem suite with trials spread over worker threads.

    Per-trial seeds are split from the master seed, and outcomes are stored
    by trial index, so the report does not depend on scheduling.
    """
    _suite_setup(theorem, d)
    seeds = spawn_seeds(seed, trials, salt=THEOREMS.index(theorem))
    limiter = anyio.CapacityLimiter(get_thread_limit())
    outcomes: list = [None] * trials

    async def worker(index: int) -> None:
        outcomes[index] = await anyio.to_thread.run_sync(
            run_trial, theorem, d, index, seeds[index], limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index in range(trials):
            tg.start_soon(worker, index)

    report = SuiteReport(theorem, d, trials, seed, tuple(outcomes))
    logger.info("suite %s: %d trials, %d violations", theorem, trials, len(report.violations))
    return report


def run_suite(theorem: str, d: int = 2, trials: int = 200, seed: int = 0) -> SuiteReport:
    return anyio.run(run_suite_async, theorem, d, trials, seed)
