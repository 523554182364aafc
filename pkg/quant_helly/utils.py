"""Shared utilities for quant-helly: seeding, the JSON codec and schema checks."""
import json
import math
from pathlib import Path
from typing import Any, List, Optional

import numpy as np

from .config import MAX_DIM
from .errors import InvalidInput


# Constants
RNG_NAME = "Philox"
BODY_TYPES = ("hpolytope", "axisbox", "zonotope", "ellipsoid", "hconvex", "segment")


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the same seed gives the same stream everywhere."""
    return np.random.Generator(np.random.Philox(int(seed)))


def spawn_seeds(seed: int, count: int, salt: int = 0) -> List[int]:
    """
    Derive independent 64-bit child seeds from one master seed.

    Args:
        seed: Master seed
        count: Number of children
        salt: Distinguishes several families of children from one master

    Returns:
        List of child seeds, stable across runs and platforms
    """
    root = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(salt),))
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in root.spawn(count)]


def _real(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def body_to_dict(body) -> dict:
    """Serialize a body to its JSON object."""
    from .geom_core import AxisBox, Ellipsoid, HConvexSet, HPolytope, Segment, Zonotope

    if isinstance(body, HPolytope):
        return {
            "type": "hpolytope",
            "dim": body.dim,
            "halfspaces": [{"normal": hs.normal.tolist(), "offset": float(hs.offset)} for hs in body.halfspaces],
        }
    if isinstance(body, AxisBox):
        return {"type": "axisbox", "center": body.center.tolist(), "halfwidths": body.halfwidths.tolist()}
    if isinstance(body, Zonotope):
        return {"type": "zonotope", "center": body.center.tolist(),
                "directions": body.directions.tolist(), "coeffs": body.coeffs.tolist()}
    if isinstance(body, Ellipsoid):
        return {"type": "ellipsoid", "center": body.center.tolist(), "shape": body.shape.tolist()}
    if isinstance(body, HConvexSet):
        return {"type": "hconvex", "hset": body.hset.tolist(), "supports": body.supports.tolist()}
    if isinstance(body, Segment):
        return {"type": "segment", "start": body.start.tolist(), "end": body.end.tolist()}
    raise InvalidInput(f"cannot serialize {type(body).__name__}")


def body_from_dict(data: dict):
    """
    Build a body from its JSON object.

    Raises:
        InvalidInput: If the object fails validation
    """
    from .geom_core import AxisBox, Ellipsoid, HConvexSet, HPolytope, Segment, Zonotope

    errors = validate_body(data)
    if errors:
        raise InvalidInput("; ".join(errors))
    kind = data["type"]
    if kind == "hpolytope":
        hs = data["halfspaces"]
        if not hs:
            return HPolytope(int(data["dim"]), ())
        return HPolytope.from_arrays([h["normal"] for h in hs], [h["offset"] for h in hs])
    if kind == "axisbox":
        return AxisBox(data["center"], data["halfwidths"])
    if kind == "zonotope":
        return Zonotope(data["center"], data["directions"], data["coeffs"])
    if kind == "ellipsoid":
        return Ellipsoid(data["center"], data["shape"])
    if kind == "hconvex":
        return HConvexSet(data["hset"], data["supports"])
    return Segment(data["start"], data["end"])


def report_to_dict(report) -> dict:
    """Serialize a SolveReport."""
    extras = {}
    for key, value in sorted(report.extras.items()):
        if isinstance(value, float):
            value = _real(value)
        extras[key] = value
    return {
        "witness": None if report.witness is None else body_to_dict(report.witness),
        "objective_value": _real(report.objective_value),
        "status": report.status.value,
        "iterations": int(report.iterations),
        "kkt_residual": _real(report.kkt_residual),
        "degenerate": bool(report.degenerate),
        "extras": extras,
    }


def dumps(data: Any) -> str:
    """Canonical JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, data: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data))


def load_json(path: Path) -> Any:
    """
    Read a JSON file.

    Raises:
        InvalidInput: Missing file or malformed JSON
    """
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise InvalidInput(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None


# ---------------------------------------------------------------------------
# Validation: each function returns a list of error messages (empty if valid)


def validate_vector(value: Any, field_name: str, label: str, dim: Optional[int] = None) -> Optional[str]:
    """
    Validate a list of finite reals.

    Returns:
        Error message if invalid, None if valid
    """
    if not isinstance(value, list):
        return f"{label}: '{field_name}' must be a list of numbers"
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return f"{label}: '{field_name}' must contain only numbers"
    if not all(math.isfinite(x) for x in value):
        return f"{label}: '{field_name}' must be finite"
    if dim is not None and len(value) != dim:
        return f"{label}: '{field_name}' must have {dim} entries (got: {len(value)})"
    if not 1 <= len(value) <= MAX_DIM and dim is None:
        return f"{label}: '{field_name}' dimension must be in 1..{MAX_DIM} (got: {len(value)})"
    return None


def validate_matrix(value: Any, field_name: str, label: str, cols: Optional[int] = None) -> Optional[str]:
    if not isinstance(value, list) or not value:
        return f"{label}: '{field_name}' must be a nonempty list of rows"
    for i, row in enumerate(value):
        error = validate_vector(row, f"{field_name}[{i}]", label, cols)
        if error:
            return error
        cols = len(row)
    return None


def validate_body(data: Any, label: str = "Body") -> List[str]:
    """Validate one body object."""
    errors = []
    if not isinstance(data, dict):
        return [f"{label}: must be an object"]
    kind = data.get("type")
    if kind not in BODY_TYPES:
        return [f"{label}: 'type' must be one of {', '.join(BODY_TYPES)} (got: {kind!r})"]

    if kind == "hpolytope":
        dim = data.get("dim")
        if not isinstance(dim, int) or isinstance(dim, bool) or not 1 <= dim <= MAX_DIM:
            return [f"{label}: 'dim' must be an integer in 1..{MAX_DIM}"]
        halfspaces = data.get("halfspaces")
        if not isinstance(halfspaces, list):
            return [f"{label}: 'halfspaces' must be a list"]
        for i, hs in enumerate(halfspaces):
            prefix = f"{label} halfspace {i}"
            if not isinstance(hs, dict):
                errors.append(f"{prefix}: must be an object")
                continue
            error = validate_vector(hs.get("normal"), "normal", prefix, dim)
            if error:
                errors.append(error)
            elif not any(hs["normal"]):
                errors.append(f"{prefix}: 'normal' must be nonzero")
            offset = hs.get("offset")
            if not isinstance(offset, (int, float)) or isinstance(offset, bool) or not math.isfinite(offset):
                errors.append(f"{prefix}: 'offset' must be a finite number")
        return errors

    if kind == "segment":
        for key in ("start", "end"):
            error = validate_vector(data.get(key), key, label)
            if error:
                errors.append(error)
        if not errors and len(data["start"]) != len(data["end"]):
            errors.append(f"{label}: 'start' and 'end' must have the same length")
        return errors

    if kind == "hconvex":
        error = validate_matrix(data.get("hset"), "hset", label)
        if error:
            return [error]
        error = validate_vector(data.get("supports"), "supports", label, len(data["hset"]))
        return [error] if error else []

    error = validate_vector(data.get("center"), "center", label)
    if error:
        return [error]
    dim = len(data["center"])
    if kind == "axisbox":
        error = validate_vector(data.get("halfwidths"), "halfwidths", label, dim)
        if error:
            errors.append(error)
        elif any(w < 0 for w in data["halfwidths"]):
            errors.append(f"{label}: 'halfwidths' must be nonnegative")
    elif kind == "zonotope":
        error = validate_matrix(data.get("directions"), "directions", label, dim)
        if error:
            errors.append(error)
        else:
            error = validate_vector(data.get("coeffs"), "coeffs", label, len(data["directions"]))
            if error:
                errors.append(error)
    elif kind == "ellipsoid":
        error = validate_matrix(data.get("shape"), "shape", label, dim)
        if error:
            errors.append(error)
        elif len(data["shape"]) != dim:
            errors.append(f"{label}: 'shape' must be {dim}x{dim}")
    return errors


def validate_family(data: Any, label: str = "Family") -> List[str]:
    """Validate a nonempty list of hpolytope objects sharing one dimension."""
    if not isinstance(data, list):
        return [f"{label}: must be a list of bodies"]
    if not data:
        return [f"{label}: must be nonempty"]
    errors = []
    dims = set()
    for i, body in enumerate(data):
        body_errors = validate_body(body, f"{label} member {i}")
        if not body_errors and body["type"] != "hpolytope":
            body_errors = [f"{label} member {i}: family members must be hpolytope bodies"]
        errors.extend(body_errors)
        if not body_errors:
            dims.add(body["dim"])
    if len(dims) > 1:
        errors.append(f"{label}: members have mixed dimensions {sorted(dims)}")
    return errors


def validate_problem(data: Any) -> List[str]:
    """
    Validate a solve request.

    Shape: {"problem": {"family": [...], "witness_class": ..., "objective": ...,
    "directions"?: [[...]], "hset"?: [[...]]}, "options"?: {...}}
    """
    from .witness_solvers import Objective, WitnessClass

    if not isinstance(data, dict):
        return ["Root must be a JSON object"]
    problem = data.get("problem")
    if not isinstance(problem, dict):
        return ["Missing required 'problem' object"]
    errors = validate_family(problem.get("family"), "problem.family")
    if "witness_class" in problem and problem["witness_class"] not in {w.value for w in WitnessClass}:
        errors.append(f"problem: unknown witness_class {problem['witness_class']!r}")
    if "objective" in problem and problem["objective"] not in {o.value for o in Objective}:
        errors.append(f"problem: unknown objective {problem['objective']!r}")
    for key in ("directions", "hset"):
        if key in problem:
            error = validate_matrix(problem[key], key, "problem")
            if error:
                errors.append(error)
    options = data.get("options", {})
    if not isinstance(options, dict):
        errors.append("'options' must be an object")
    return errors


def validate_points(data: Any) -> List[str]:
    """Validate {"points": [[...], ...]} with a common dimension."""
    if not isinstance(data, dict) or "points" not in data:
        return ["Root must be an object with a 'points' list"]
    error = validate_matrix(data["points"], "points", "Points")
    return [error] if error else []


def validate_witness_list(data: Any) -> List[str]:
    """Validate {"witnesses": [...bodies...]} for the Tverberg engine."""
    if not isinstance(data, dict) or not isinstance(data.get("witnesses"), list):
        return ["Root must be an object with a 'witnesses' list"]
    if not data["witnesses"]:
        return ["'witnesses' must be nonempty"]
    errors = []
    for i, body in enumerate(data["witnesses"]):
        errors.extend(validate_body(body, f"Witness {i}"))
    return errors


def validate_certificate(data: Any) -> List[str]:
    """Validate a Tverberg certificate file."""
    errors = []
    if not isinstance(data, dict):
        return ["Root must be a JSON object"]
    for key in ("witnesses", "partition", "decoded_witness", "objective_value", "threshold", "r"):
        if key not in data:
            errors.append(f"Missing required '{key}' field")
    if errors:
        return errors
    errors.extend(validate_witness_list({"witnesses": data["witnesses"]}))
    errors.extend(validate_body(data["decoded_witness"], "decoded_witness"))
    partition = data["partition"]
    if not isinstance(partition, list) or not all(isinstance(part, list) for part in partition):
        errors.append("'partition' must be a list of index lists")
    else:
        flat = [i for part in partition for i in part]
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in flat):
            errors.append("'partition' entries must be integers")
        elif sorted(flat) != list(range(len(data["witnesses"]))):
            errors.append("'partition' must split the witness indices into disjoint parts covering all of them")
        if len(partition) != data["r"]:
            errors.append(f"'partition' must have r={data['r']} parts (got: {len(partition)})")
    for key in ("objective_value", "threshold"):
        value = data[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            errors.append(f"'{key}' must be a finite number")
    return errors
