#!/usr/bin/env python3
"""Command-line interface for quant-helly."""
import argparse
import logging
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import anyio
import numpy as np

from . import __version__
from .config import get_default_output_dir, get_thread_limit
from .errors import InvalidInput, NotFound, QuantHellyError, SearchExhausted
from .geom_core import Segment
from .helly_lab import THEOREMS, john_counterexample, run_suite_async
from .lp_type import calibrate_calls, calibration_csv, random_ball_instance, random_box_instance
from .tverberg_lab import (
    ChartKind,
    largest_orientation_class,
    make_chart,
    quantitative_tverberg,
    tverberg_points,
    volume_tverberg,
)
from .utils import (
    RNG_NAME,
    body_from_dict,
    body_to_dict,
    load_json,
    report_to_dict,
    validate_family,
    validate_points,
    validate_problem,
    validate_witness_list,
    write_json,
)
from .verify import verify_certificate
from .witness_solvers import (
    Objective,
    WitnessClass,
    WitnessProblem,
    min_eps_approx,
)

SOLVE_CLASSES = {
    "solve-box": WitnessClass.AXIS_BOX,
    "solve-zonotope": WitnessClass.ZONOTOPE,
    "solve-ellipsoid": WitnessClass.ELLIPSOID,
    "solve-hconvex": WitnessClass.HCONVEX,
}
ELLIPSOID_CLASSES = {
    "free": WitnessClass.ELLIPSOID,
    "centered": WitnessClass.ELLIPSOID_CENTERED,
    "axis-parallel": WitnessClass.ELLIPSOID_AXIS_PARALLEL,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; echoed into every output file."""

    command: str
    input_path: Optional[str]
    output_path: Optional[str]
    seed: int = 0
    trials: Optional[int] = None
    dimension: Optional[int] = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="quant-helly",
        description="Quantitative Helly and Tverberg theorems: witness solvers, harnesses and certificates",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Largest inscribed box of a family
  quant-helly solve-box --in square.json

  # Run a Helly theorem suite
  quant-helly helly-test --theorem ellipsoid --d 2 --trials 200 --seed 1

  # Tverberg certificate for unit-volume boxes, then re-check it
  quant-helly tverberg --chart zonotope --r 2 --in boxes.json --out cert.json
  quant-helly verify --cert cert.json
        """
    )
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level")
    parser.add_argument(
        "--output-dir",
        type=Path,
        default=get_default_output_dir(),
        help=f"Directory for output files (default: {get_default_output_dir()})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, needs_input: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        if needs_input:
            p.add_argument("--in", dest="input", type=Path, required=True, metavar="FILE", help="Input JSON")
        p.add_argument("--out", type=Path, metavar="FILE", help="Output JSON (default: OUTPUT_DIR/<command>.json)")
        p.add_argument("--seed", type=int, default=0, help="Master seed (default: 0)")
        return p

    for name in SOLVE_CLASSES:
        p = add(name, f"Optimal {name.split('-', 1)[1]} witness in the intersection of a family")
        p.add_argument("--objective", choices=[o.value for o in Objective],
                       help="Objective (default: the problem file's, else Volume)")
        if name == "solve-ellipsoid":
            p.add_argument("--constraint", choices=sorted(ELLIPSOID_CLASSES), default="free")

    p = add("approx", "Smallest simultaneous eps-approximation factor")
    p.add_argument("--class", dest="witness_class", default=WitnessClass.AXIS_BOX.value,
                   choices=[WitnessClass.AXIS_BOX.value, WitnessClass.ZONOTOPE.value])

    p = add("lptype-bench", "Oracle-call calibration of the LP-type solver", needs_input=False)
    p.add_argument("--problem", choices=["box", "ball"], default="ball")
    p.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--d", type=int, default=2)

    p = add("helly-test", "Seeded theorem suite", needs_input=False)
    p.add_argument("--theorem", choices=THEOREMS, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)

    p = add("counterexample", "Halfspace family where no smaller subfamily keeps the inscribed ellipsoid",
            needs_input=False)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--max-restarts", type=int, default=10_000)

    p = add("tverberg", "Quantitative Tverberg certificate")
    p.add_argument("--chart", choices=[c.value for c in ChartKind], help="Witness chart (required unless --points)")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--threshold", type=float, help="Objective threshold (default: smallest input objective)")
    p.add_argument("--volume", action="store_true",
                   help="Input is a family of unit-volume polytopes; certify through inscribed ellipsoids")
    p.add_argument("--points", action="store_true", help="Input is a point set; plain Tverberg partition")
    p.add_argument("--audit-directions", type=int)

    p = sub.add_parser("verify", help="Independent re-check of a Tverberg certificate")
    p.add_argument("--cert", type=Path, required=True, metavar="FILE")
    p.add_argument("--audit-directions", type=int)

    return parser.parse_args(argv)


def _load(path: Path, validator) -> dict:
    data = load_json(path)
    errors = validator(data)
    if errors:
        print(f"✗ Invalid input file: {path}", file=sys.stderr)
        for error in errors:
            print(f"  - {error}", file=sys.stderr)
        raise InvalidInput(f"Input file failed validation with {len(errors)} error(s)")
    return data


def _family(items: list) -> list:
    return [body_from_dict(item) for item in items]


def _problem(data: dict, witness_class: WitnessClass, objective: Optional[str]) -> WitnessProblem:
    problem = data["problem"]
    objective = objective or problem.get("objective", Objective.VOLUME.value)
    return WitnessProblem(
        tuple(_family(problem["family"])),
        witness_class,
        Objective(objective),
        directions=np.asarray(problem["directions"], dtype=float) if "directions" in problem else None,
        hset=np.asarray(problem["hset"], dtype=float) if "hset" in problem else None,
    )


def _dump_instance(args, instance: dict, tag: str = "") -> Path:
    path = args.output_dir / f"{args.command}-violation{tag}.json"
    write_json(path, {"version": __version__, "instance": instance})
    print(f"   Instance dumped to {path}")
    return path


def _run_solve(args) -> dict:
    data = _load(args.input, validate_problem)
    witness_class = SOLVE_CLASSES[args.command]
    if args.command == "solve-ellipsoid":
        witness_class = ELLIPSOID_CLASSES[args.constraint]
    report = _problem(data, witness_class, args.objective).solve()
    print(f"   Status: {report.status.value}")
    print(f"   Objective: {report.objective_value:.9g}")
    return report_to_dict(report)


def _run_approx(args) -> dict:
    data = _load(args.input, validate_problem)
    problem = data["problem"]
    directions = np.asarray(problem["directions"], dtype=float) if "directions" in problem else None
    result = min_eps_approx(_family(problem["family"]), WitnessClass(args.witness_class), directions)
    print(f"   eps* = {result.eps:.9g} after {result.lp_calls} LPs")
    return {
        "eps": result.eps,
        "witness": None if result.witness is None else body_to_dict(result.witness),
        "translate": None if result.translate is None else result.translate.tolist(),
        "lp_calls": result.lp_calls,
    }


def _run_bench(args) -> dict:
    generator = random_ball_instance if args.problem == "ball" else random_box_instance
    rows, table = calibrate_calls(lambda n, rng: generator(n, rng, args.d), args.sizes, args.trials, args.seed)
    csv_path = args.out.with_suffix(".csv")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(calibration_csv(rows))
    for n, mean_calls in table:
        print(f"   n={n:>5}  mean oracle calls {mean_calls:.2f}")
    print(f"   Per-trial rows saved to {csv_path}")
    return {"problem": args.problem, "table": [{"n": n, "mean_oracle_calls": c} for n, c in table]}


async def _run_helly(args) -> tuple[dict, int]:
    report = await run_suite_async(args.theorem, args.d, args.trials, args.seed)
    summary = report.to_dict()
    print(f"   Conclusion held: {summary['summary']['conclusion_held']}/{args.trials}")
    if report.violations:
        print(f"✗ {len(report.violations)} theorem-violation candidate(s)")
        for outcome in report.violations:
            _dump_instance(args, outcome.instance, f"-{outcome.trial}")
        return summary, 1
    print("✓ No violations")
    return summary, 0


def _run_counterexample(args) -> dict:
    family, certificate = john_counterexample(args.d, args.seed, args.max_restarts)
    print(f"   {len(family)} halfspaces, John residual {certificate['identity_residual']:.3g}")
    if "min_subset_gap" in certificate:
        print(f"   Smallest area gain when dropping a halfspace: {certificate['min_subset_gap']:.6g}")
    return {"family": [body_to_dict(p) for p in family], "certificate": certificate}


def _tverberg(args) -> dict:
    """Blocking part of the tverberg command (runs in a worker thread)."""
    if args.points:
        data = _load(args.input, validate_points)
        partition, point = tverberg_points(data["points"], args.r)
        return {"kind": "tverberg-partition", "r": args.r,
                "partition": [list(part) for part in partition], "common_point": point.tolist()}
    if args.chart is None:
        raise InvalidInput("--chart is required unless --points is given")
    if args.volume:
        data = _load(args.input, lambda d: validate_family(d.get("family") if isinstance(d, dict) else None))
        centered = ChartKind(args.chart) is ChartKind.ELLIPSOID_SUM
        cert = volume_tverberg(_family(data["family"]), args.r, centered, args.audit_directions)
        return cert.to_dict()

    data = _load(args.input, validate_witness_list)
    witnesses = _family(data["witnesses"])
    first = witnesses[0]
    kind = ChartKind(args.chart)
    extras = {}
    signs = None
    if kind is ChartKind.SEGMENT and all(isinstance(w, Segment) for w in witnesses):
        signs, kept = largest_orientation_class(witnesses)
        if len(kept) < len(witnesses):
            print(f"   Using the largest orientation class: {len(kept)} of {len(witnesses)} segments")
            witnesses = [witnesses[i] for i in kept]
        extras["orientation"] = list(signs)
        extras["kept_indices"] = kept
    chart = make_chart(
        kind, first.dim,
        directions=data.get("directions", getattr(first, "directions", None)),
        hset=data.get("hset", getattr(first, "hset", None)),
        signs=signs,
    )
    threshold = args.threshold
    if threshold is None:
        threshold = min(chart.objective(w) for w in witnesses)
    cert = quantitative_tverberg(witnesses, chart, args.r, threshold, args.audit_directions)
    result = cert.to_dict()
    result["extras"].update(extras)
    return result


async def _run_tverberg(args) -> dict:
    cert = await anyio.to_thread.run_sync(_tverberg, args)
    print(f"   Partition: {cert['partition']}")
    if args.points:
        print(f"   Common point: {cert['common_point']}")
        return cert
    print(f"   Decoded objective {cert['objective_value']:.9g} (threshold {cert['threshold']:.9g})")
    print(f"   Smallest containment gap {cert['containment_evidence']['min_gap']:.3g}")
    print("✓ Certificate written")
    return cert


async def async_main(argv=None) -> int:
    """Async main entry point for the quant-helly CLI."""
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "verify":
        print("VERIFY CERTIFICATE MODE")
        print(f"   Loading from: {args.cert}\n")
        return 0 if verify_certificate(args.cert, args.audit_directions) else 1

    try:
        threads = get_thread_limit()
    except ValueError as e:
        raise InvalidInput(str(e)) from None

    args.output_dir.mkdir(parents=True, exist_ok=True)
    if args.out is None:
        args.out = args.output_dir / f"{args.command}.json"
    config = RunConfig(
        command=args.command,
        input_path=str(args.input) if getattr(args, "input", None) else None,
        output_path=str(args.out),
        seed=args.seed,
        trials=getattr(args, "trials", None),
        dimension=getattr(args, "d", None),
        options={k: v for k, v in sorted(vars(args).items())
                 if k not in ("command", "input", "out", "seed", "trials", "d", "output_dir", "verbose")},
    )

    print(f"{args.command.upper()} MODE")
    print(f"   quant-helly {__version__}, seed {args.seed}, rng {RNG_NAME}, {threads} threads")
    print(f"   Output will be saved to {args.out}\n")
    started = time.perf_counter()

    status = 0
    try:
        if args.command in SOLVE_CLASSES:
            result = _run_solve(args)
        elif args.command == "approx":
            result = _run_approx(args)
        elif args.command == "lptype-bench":
            result = _run_bench(args)
        elif args.command == "helly-test":
            result, status = await _run_helly(args)
        elif args.command == "counterexample":
            result = _run_counterexample(args)
        else:
            result = await _run_tverberg(args)
    except (NotFound, SearchExhausted) as e:
        if e.instance:
            _dump_instance(args, e.instance)
        raise

    write_json(args.out, {"config": config.to_dict(), "version": __version__, "rng": RNG_NAME, "result": result})
    print(f"\n{'='*60}")
    print(f"Saved {args.out} ({time.perf_counter() - started:.2f}s)")
    print(f"{'='*60}")
    return status


def run(argv=None) -> int:
    """
    Run the CLI and map outcomes to exit codes.

    Returns:
        0 on success, 1 on a theorem-violation candidate or failed
        verification, 2 on malformed input
    """
    try:
        return anyio.run(async_main, argv)
    except KeyboardInterrupt:
        print("\n\nCancelled by user")
        return 1
    except InvalidInput as e:
        print(f"✗ {e}", file=sys.stderr)
        return 2
    except (NotFound, SearchExhausted) as e:
        print(f"\n✗ Theorem-violation candidate: {e}")
        return 1
    except QuantHellyError as e:
        print(f"\n✗ {type(e).__name__}: {e}")
        return 1
    except Exception as e:
        print(f"\n\nError: {e}")
        traceback.print_exc()
        return 1


def main():
    """Main entry point for the quant-helly CLI."""
    sys.exit(run())


if __name__ == "__main__":
    main()
