"""Exception hierarchy for quant-helly.

Bad input raises a ValueError subclass, failed computation a RuntimeError
subclass, so callers can keep catching the builtins.
"""


class QuantHellyError(Exception):
    """Base class for every error raised by quant-helly."""


# input-side errors

class InvalidInput(QuantHellyError, ValueError):
    """Malformed or out-of-contract input."""


class DimensionTooLarge(InvalidInput):
    """Operation only implemented for small dimensions."""


class DirectionMismatch(InvalidInput):
    """Two bodies do not share the same direction set."""


class HalfSphereViolation(InvalidInput):
    """Direction set H lies in a closed half-sphere."""


class RankDeficientDirections(InvalidInput):
    """Zonotope generators do not span the space."""


class DegenerateInput(InvalidInput):
    """Point set is affinely dependent."""


class NotSPD(InvalidInput):
    """Shape matrix is not symmetric positive definite."""


class TheoremArityMismatch(InvalidInput):
    """Subfamily size or class count does not match the theorem."""


class TooManySubsets(InvalidInput):
    """Exhaustive subset enumeration above the configured cap."""


class TooManyTransversals(InvalidInput):
    """Transversal enumeration above the configured cap."""


# computational errors

class Infeasible(QuantHellyError, RuntimeError):
    """Constraint system has no solution."""


class EmptyBody(Infeasible):
    """Support queried on an empty polytope."""


class Unbounded(QuantHellyError, RuntimeError):
    """Objective is unbounded on the feasible region."""


class NumericalFailure(QuantHellyError, RuntimeError):
    """Solver failed for numerical reasons."""


class NoFiniteEps(QuantHellyError, RuntimeError):
    """No finite approximation factor exists."""


class SearchFailed(QuantHellyError, RuntimeError):
    """Randomized search gave up after its restart budget."""


class SearchExhausted(QuantHellyError, RuntimeError):
    """Exhaustive search found nothing although the premise holds.

    Carries the instance so the harness can dump it.
    """

    def __init__(self, message: str, instance: dict | None = None):
        super().__init__(message)
        self.instance = instance or {}


class NotFound(QuantHellyError, RuntimeError):
    """No Tverberg partition found."""

    def __init__(self, message: str, instance: dict | None = None):
        super().__init__(message)
        self.instance = instance or {}


class ContainmentAuditFailed(QuantHellyError, RuntimeError):
    """Decoded witness sticks out of some part's convex hull."""
