"""Re-verify saved Tverberg certificates."""
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidInput
from .geom_core import POLYTOPAL, Segment, body_vertices, lp_solve_arrays
from .utils import body_from_dict, load_json, make_rng, validate_certificate

logger = logging.getLogger(__name__)

GAP_TOL = 1e-6
VALUE_TOL = 1e-6
AUDIT_SEED = 20240917


def _directions(dim: int, count: int) -> np.ndarray:
    # Half-step offset angles in the plane, seeded Gaussian directions above.
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    U = make_rng(AUDIT_SEED).standard_normal((count, dim))
    return U / np.linalg.norm(U, axis=1)[:, None]


def _in_hull(point: np.ndarray, cloud: np.ndarray) -> float:
    """L1 residual of the best convex combination of cloud rows reproducing point."""
    m, d = cloud.shape
    # variables: weights (m), slack+ (d), slack- (d)
    c = np.concatenate([np.zeros(m), np.ones(2 * d)])
    A_eq = np.vstack([
        np.hstack([cloud.T, np.eye(d), -np.eye(d)]),
        np.concatenate([np.ones(m), np.zeros(2 * d)])[None, :],
    ])
    b_eq = np.append(point, 1.0)
    res = lp_solve_arrays(c, None, None, A_eq, b_eq, [(0, None)] * (m + 2 * d), sense="min")
    return res.value if res.ok else np.inf


def _objective(body) -> float:
    return body.l1_length if isinstance(body, Segment) else body.volume()


def audit_certificate(data: dict, directions: Optional[int] = None) -> list[str]:
    """
    Independent containment and objective check of a certificate dict.

    Returns:
        List of failed checks (empty if the certificate holds)
    """
    witnesses = [body_from_dict(w) for w in data["witnesses"]]
    decoded = body_from_dict(data["decoded_witness"])
    d = decoded.dim
    m = directions or (720 if d == 2 else 2048)
    U = _directions(d, m)
    own = decoded.support_many(U)
    threshold = float(data["threshold"])
    problems = []

    for j, part in enumerate(data["partition"]):
        if not part:
            problems.append(f"part {j} is empty")
            continue
        hull = np.max([witnesses[i].support_many(U) for i in part], axis=0)
        gap = float(np.min(hull - own))
        if gap < -GAP_TOL:
            problems.append(f"part {j}: decoded witness sticks out by {-gap:.3g}")
        if isinstance(decoded, POLYTOPAL) and d <= 3 and all(isinstance(witnesses[i], POLYTOPAL) for i in part):
            cloud = np.vstack([body_vertices(witnesses[i]) for i in part])
            worst = max(_in_hull(v, cloud) for v in body_vertices(decoded))
            if worst > GAP_TOL:
                problems.append(f"part {j}: a witness vertex is {worst:.3g} away from the part hull")

    value = _objective(decoded)
    if value < threshold - VALUE_TOL:
        problems.append(f"decoded objective {value:.9g} below threshold {threshold:.9g}")
    if abs(value - float(data["objective_value"])) > VALUE_TOL * max(1.0, abs(value)):
        problems.append(f"recorded objective {data['objective_value']:.9g} differs from recomputed {value:.9g}")
    return problems


def verify_certificate(cert_file: Path, directions: Optional[int] = None) -> bool:
    """
    Re-run the containment audit of a saved certificate.

    Args:
        cert_file: Path to a certificate written by the tverberg command
        directions: Audit direction count (default 720 in the plane, 2048 above)

    Returns:
        True if every check passes
    """
    data = load_json(cert_file)
    # run files from the tverberg command wrap the certificate
    if isinstance(data, dict) and "config" in data and isinstance(data.get("result"), dict):
        data = data["result"]

    errors = validate_certificate(data)
    if errors:
        print(f"✗ Invalid certificate file: {cert_file}")
        for error in errors:
            print(f"  - {error}")
        raise InvalidInput(f"Certificate file failed validation with {len(errors)} error(s)")

    print(f"📂 Loading certificate from: {cert_file}")
    print(f"   {len(data['witnesses'])} witnesses in {data['r']} parts, threshold {data['threshold']}\n")

    problems = audit_certificate(data, directions)
    if problems:
        for problem in problems:
            print(f"  - {problem}")
        print(f"\n✗ Certificate failed {len(problems)} check(s)")
        logger.warning("certificate %s failed verification", cert_file)
        return False

    print("✓ Certificate verified")
    return True
