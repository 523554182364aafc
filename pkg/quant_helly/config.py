"""Configuration for quant-helly: tolerances, caps and environment lookups."""
import os
from pathlib import Path


# Dimension ceiling for every body type
MAX_DIM = 8

# Tolerances, stated once and used everywhere
CONTAIN_TOL = 1e-8
VERTEX_TOL = 1e-9
SPD_FLOOR = 1e-10
SYMMETRY_TOL = 1e-10
VIOLATION_TOL = 1e-7
DEGENERATE_WIDTH = 1e-12
OBJECTIVE_SLACK = 1e-9

# Unbounded families get clipped to this box before volume work
BOUNDING_RADIUS = 10.0

# Enumeration caps
MAX_HELLY_FAMILY = 14
MAX_TRANSVERSALS = 10**5
MAX_PARTITIONS = 10**7
MAX_LP_VARS = 64


def get_thread_limit() -> int:
    """
    Worker cap for harness trials.

    Reads QH_THREADS; falls back to the CPU count.

    Raises:
        ValueError: If QH_THREADS is set but not a positive integer
    """
    raw = os.getenv("QH_THREADS")
    if raw is None or not raw.strip():
        return os.cpu_count() or 1

    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"QH_THREADS must be a positive integer (got: {raw!r})") from None
    if value < 1:
        raise ValueError(f"QH_THREADS must be a positive integer (got: {value})")
    return value


def get_default_output_dir() -> Path:
    """Default output directory (XDG style), overridable with QH_OUTPUT_DIR."""
    override = os.getenv("QH_OUTPUT_DIR")
    if override:
        return Path(override)
    return Path.home() / ".local" / "share" / "quant-helly"
