"""
Randomized LP-type solver with oracle-call instrumentation.

A problem is an ordered list of constraint handles, a combinatorial
dimension delta, a basis oracle solving subsets of at most delta
constraints, and a violation test. The solver orders the constraints
randomly, solves the first delta of them, and scans: a violator m is pinned,
every delta-tuple of (basis + m) containing m is solved and the most
constrained one becomes the new basis, and the prefix K_1..K_m is solved
again recursively with that basis in front.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

from .config import BOUNDING_RADIUS, MAX_HELLY_FAMILY, VIOLATION_TOL
from .errors import Infeasible, InvalidInput, TooManySubsets
from .geom_core import (
    AxisBox,
    HPolytope,
    as_vec,
    bounding_box,
    containment_margin,
)
from .utils import make_rng, spawn_seeds
from .witness_solvers import (
    SolveReport,
    SolveStatus,
    WitnessClass,
    max_volume_box,
    max_volume_ellipsoid,
    min_eps_approx,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LpTypeProblem:
    """
    Constraint handles plus the oracles defining an LP-type problem.

    `sense` says which way the objective moves: "max" problems lose value as
    constraints are added (largest box), "min" problems gain it (smallest
    enclosing ball). The solver compares solutions through that key only.
    """

    constraints: tuple
    combinatorial_dim: int
    basis_oracle: Callable[[tuple], SolveReport]
    violates: Callable[[SolveReport, object], bool]
    sense: str = "max"
    name: str = "lp-type"

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise InvalidInput("an LP-type problem needs at least one constraint")
        if self.combinatorial_dim < 1:
            raise InvalidInput(f"combinatorial dimension must be positive (got: {self.combinatorial_dim})")
        if self.sense not in ("max", "min"):
            raise InvalidInput(f"sense must be 'max' or 'min' (got: {self.sense!r})")

    def key(self, report: SolveReport) -> float:
        """Larger means more constrained."""
        return -report.objective_value if self.sense == "max" else report.objective_value


@dataclass
class RunStats:
    oracle_calls: int = 0
    violation_tests: int = 0
    recursion_depth: int = 0
    seed: int = 0


@dataclass(frozen=True)
class LpTypeResult:
    report: SolveReport
    basis: tuple
    basis_indices: tuple
    stats: RunStats


class _Run:
    def __init__(self, problem: LpTypeProblem, stats: RunStats):
        self.problem = problem
        self.stats = stats

    def oracle(self, indices: tuple) -> SolveReport:
        self.stats.oracle_calls += 1
        report = self.problem.basis_oracle(tuple(self.problem.constraints[i] for i in indices))
        if report.status is SolveStatus.INFEASIBLE:
            raise Infeasible(f"{self.problem.name}: constraint subset {list(indices)} is infeasible")
        return report

    def violated(self, report: SolveReport, index: int) -> bool:
        self.stats.violation_tests += 1
        return self.problem.violates(report, self.problem.constraints[index])

    def pinned(self, basis: tuple, pin: int) -> tuple[tuple, SolveReport]:
        """Worst delta-tuple of basis + pin containing pin; ties go to the lexicographically smallest."""
        pool = basis + (pin,)
        size = min(self.problem.combinatorial_dim, len(pool))
        best_key, best = -math.inf, None
        for tup in sorted((t for t in combinations(pool, size) if pin in t), key=sorted):
            report = self.oracle(tup)
            key = self.problem.key(report)
            if best is None or key > best_key:
                best_key, best = key, (tup, report)
        return best

    def solve(self, seq: list, basis: tuple, report: SolveReport, depth: int) -> tuple[tuple, SolveReport]:
        self.stats.recursion_depth = max(self.stats.recursion_depth, depth)
        i = len(basis)
        while i < len(seq):
            c = seq[i]
            if not self.violated(report, c):
                i += 1
                continue
            new_basis, new_report = self.pinned(basis, c)
            if self.problem.key(new_report) <= self.problem.key(report):
                # oracle noise: pinning c does not tighten the solution
                logger.debug("%s: violation by %d did not tighten the solution", self.problem.name, c)
                i += 1
                continue
            prefix = list(new_basis) + [x for x in seq[:i + 1] if x not in new_basis]
            basis, report = self.solve(prefix, new_basis, new_report, depth + 1)
            i += 1
        return basis, report


def solve(problem: LpTypeProblem, seed: int = 0) -> LpTypeResult:
    """
    Randomized LP-type solve, exactly reproducible from (problem, seed).

    Returns:
        LpTypeResult with the solution, a basis of at most delta constraints
        whose oracle solution is the returned one, and run statistics
    """
    stats = RunStats(seed=int(seed))
    run = _Run(problem, stats)
    n = len(problem.constraints)
    order = [int(i) for i in make_rng(seed).permutation(n)]
    delta = min(problem.combinatorial_dim, n)
    basis = tuple(order[:delta])
    report = run.oracle(basis)
    basis, report = run.solve(order, basis, report, 0)
    logger.debug("%s: n=%d calls=%d tests=%d depth=%d", problem.name, n, stats.oracle_calls,
                 stats.violation_tests, stats.recursion_depth)
    return LpTypeResult(report, tuple(problem.constraints[i] for i in basis), basis, stats)


def solve_exhaustive(problem: LpTypeProblem, max_constraints: int = MAX_HELLY_FAMILY) -> LpTypeResult:
    """Evaluate the oracle on every delta-subset and keep the most constrained one."""
    n = len(problem.constraints)
    if n > max_constraints:
        raise TooManySubsets(f"exhaustive LP-type search is capped at {max_constraints} constraints (got: {n})")
    stats = RunStats()
    run = _Run(problem, stats)
    size = min(problem.combinatorial_dim, n)
    best_key, best = -math.inf, None
    for tup in combinations(range(n), size):
        report = run.oracle(tup)
        key = problem.key(report)
        if best is None or key > best_key:
            best_key, best = key, (tup, report)
    basis, report = best
    return LpTypeResult(report, tuple(problem.constraints[i] for i in basis), basis, stats)


# ---------------------------------------------------------------------------
# Instantiations


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    @property
    def dim(self) -> int:
        return self.center.size


def _circumball(points: np.ndarray) -> Optional[Ball]:
    base = points[0]
    if points.shape[0] == 1:
        return Ball(base.copy(), 0.0)
    D = points[1:] - base
    gram = 2 * D @ D.T
    rhs = np.sum(D**2, axis=1)
    try:
        t = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return None
    center = base + t @ D
    return Ball(center, float(np.linalg.norm(center - base)))


def smallest_ball(points) -> Ball:
    """Smallest enclosing ball of at most d+1 points (all circumballs of subsets)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    best = None
    for size in range(1, P.shape[0] + 1):
        for subset in combinations(range(P.shape[0]), size):
            ball = _circumball(P[list(subset)])
            if ball is None:
                continue
            dist = np.linalg.norm(P - ball.center, axis=1)
            if np.all(dist <= ball.radius * (1 + 1e-12) + 1e-12):
                if best is None or ball.radius < best.radius:
                    best = ball
    return best


def enclosing_ball_problem(points) -> LpTypeProblem:
    """Smallest enclosing ball, delta = d + 1."""
    pts = tuple(as_vec(p, name="point") for p in points)
    d = pts[0].size

    def oracle(subset: tuple) -> SolveReport:
        ball = smallest_ball(np.array(subset))
        return SolveReport(ball, ball.radius, SolveStatus.OPTIMAL, 1)

    def violates(report: SolveReport, point: np.ndarray) -> bool:
        return float(np.linalg.norm(point - report.witness.center)) > report.witness.radius + VIOLATION_TOL

    return LpTypeProblem(pts, d + 1, oracle, violates, sense="min", name="enclosing-ball")


def _clipped(subset: tuple) -> list[HPolytope]:
    d = subset[0].dim
    return list(subset) + [bounding_box(d, BOUNDING_RADIUS)]


def _sticks_out(report: SolveReport, poly: HPolytope) -> bool:
    if report.witness is None:
        return False
    return containment_margin(poly, report.witness) < -VIOLATION_TOL


def box_problem(family: Sequence[HPolytope]) -> LpTypeProblem:
    """Largest axis-parallel box, delta = 2d."""
    family = tuple(family)
    d = family[0].dim

    def oracle(subset: tuple) -> SolveReport:
        return max_volume_box(_clipped(subset))

    return LpTypeProblem(family, 2 * d, oracle, _sticks_out, sense="max", name="max-box")


def ellipsoid_problem(family: Sequence[HPolytope]) -> LpTypeProblem:
    """Largest inscribed ellipsoid, delta = d(d+3)/2."""
    family = tuple(family)
    d = family[0].dim

    def oracle(subset: tuple) -> SolveReport:
        return max_volume_ellipsoid(_clipped(subset))

    return LpTypeProblem(family, d * (d + 3) // 2, oracle, _sticks_out, sense="max", name="mvie")


def approx_problem(family: Sequence[HPolytope], witness_class: WitnessClass = WitnessClass.AXIS_BOX,
                   directions=None) -> LpTypeProblem:
    """
    Smallest simultaneous approximation factor, delta = l + d + 1.

    l is the chart dimension of the witness class (d for boxes, k for
    zonotopes with k directions).
    """
    family = tuple(family)
    d = family[0].dim
    witness_class = WitnessClass(witness_class)
    chart_dim = d if witness_class is WitnessClass.AXIS_BOX else np.atleast_2d(directions).shape[0]

    def oracle(subset: tuple) -> SolveReport:
        res = min_eps_approx(list(subset), witness_class, directions)
        return SolveReport(res.witness, res.eps, SolveStatus.OPTIMAL, res.lp_calls,
                           extras={"translate": res.translate.tolist()})

    def violates(report: SolveReport, poly: HPolytope) -> bool:
        inner = report.witness
        if containment_margin(poly, inner) < -VIOLATION_TOL:
            return True
        outer = _grow_about_center(inner, 1 + report.objective_value)
        return not bool(np.all(outer.contains_points(poly.vertex_array, VIOLATION_TOL)))

    return LpTypeProblem(family, chart_dim + d + 1, oracle, violates, sense="min", name="eps-approx")


def _grow_about_center(witness, factor: float):
    if isinstance(witness, AxisBox):
        return AxisBox(witness.center, factor * witness.halfwidths)
    return type(witness)(witness.center, witness.directions, factor * witness.coeffs)


# ---------------------------------------------------------------------------
# Calibration


def random_ball_instance(n: int, rng: np.random.Generator, d: int = 2) -> LpTypeProblem:
    return enclosing_ball_problem(rng.uniform(-1.0, 1.0, size=(n, d)))


def random_box_instance(n: int, rng: np.random.Generator, d: int = 2) -> LpTypeProblem:
    """n random polytopes, each containing the planted box [-1/2, 1/2]^d."""
    from .helly_lab import random_polytope_around

    planted = AxisBox(np.zeros(d), np.full(d, 0.5))
    return box_problem([random_polytope_around(planted, rng, facets=3) for _ in range(n)])


@dataclass(frozen=True)
class CalibrationRow:
    n: int
    trial: int
    seed: int
    oracle_calls: int
    violation_tests: int
    objective: float


def calibrate_calls(generator: Callable[[int, np.random.Generator], LpTypeProblem], sizes: Sequence[int],
                    trials: int, seed: int = 0) -> tuple[list[CalibrationRow], list[tuple[int, float]]]:
    """
    Mean oracle calls per problem size.

    Returns:
        (per-trial rows, [(n, mean oracle calls)]); empty when trials == 0
    """
    rows: list[CalibrationRow] = []
    table: list[tuple[int, float]] = []
    if trials <= 0:
        return rows, table
    for size_index, n in enumerate(sizes):
        trial_seeds = spawn_seeds(seed, trials, salt=size_index)
        calls = []
        for trial, trial_seed in enumerate(trial_seeds):
            problem = generator(n, make_rng(trial_seed))
            result = solve(problem, trial_seed)
            calls.append(result.stats.oracle_calls)
            rows.append(CalibrationRow(n, trial, trial_seed, result.stats.oracle_calls,
                                       result.stats.violation_tests, result.report.objective_value))
        table.append((int(n), float(np.mean(calls))))
        logger.info("calibrate: n=%d mean oracle calls %.2f", n, table[-1][1])
    return rows, table


def calibration_csv(rows: Sequence[CalibrationRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n", "trial", "seed", "oracle_calls", "violation_tests", "objective"])
    for row in rows:
        writer.writerow([row.n, row.trial, row.seed, row.oracle_calls, row.violation_tests, repr(row.objective)])
    return buffer.getvalue()
