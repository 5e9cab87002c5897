"""
Exception hierarchy for the simulator.

Every error carries the CLI exit code it maps to:
    2  configuration or input rejected
    3  event cap exceeded
    4  invariant violation detected online
"""


class FlockingError(Exception):
    """Base class for all simulator errors."""
    exit_code = 1


# =============================================================================
# Input / configuration
# =============================================================================

class InputError(FlockingError, ValueError):
    """Bad input data or arguments."""
    exit_code = 2


class NonPositiveVolume(InputError):
    """A specific volume u <= 0 (or non-finite) reached the wave algebra."""


class NonPositiveDensity(InputError):
    """A density cell is zero or negative."""


class NonPositiveInput(InputError):
    """A quantity required to be strictly positive is not."""


class EmptyDomain(InputError):
    """Total mass M <= 0."""


class EmptySupport(InputError):
    """Initial data has no cells or a0 >= b0."""


class SchemaError(InputError):
    """Initial-data file does not match the expected JSON layout."""


class ConfigRejected(InputError):
    """A (dt, eta, xi) combination violates the run constraints."""


class TimeStepTooLarge(ConfigRejected):
    """M * dt >= 1, the damping factor would not stay positive."""


class InsufficientData(InputError):
    """Too few usable samples for a decay fit."""


class AllZeroOscillation(FlockingError):
    """Velocity oscillation vanishes on the whole fit window."""


# =============================================================================
# Front tracking
# =============================================================================

class InconsistentPattern(FlockingError):
    """Front ordering or state bookkeeping is broken."""
    exit_code = 4


class NonAdjacentFronts(InconsistentPattern):
    """An interaction was requested for fronts that are not neighbors."""


class NotAtBoundary(InconsistentPattern):
    """An absorption was requested for a front away from the boundary."""


class EventCapExceeded(FlockingError):
    """The run processed more events than the configured cap."""
    exit_code = 3


# =============================================================================
# Numerics
# =============================================================================

class BracketFailure(FlockingError, ArithmeticError):
    """A bracketed root search found no sign change or missed its residual."""
    exit_code = 4


class DegenerateJump(FlockingError, ArithmeticError):
    """Interior jump with equal densities but different momenta."""
    exit_code = 4


class InvariantViolation(FlockingError):
    """An online invariant check failed."""
    exit_code = 4


class RarefactionTooLarge(InvariantViolation):
    """An outgoing rarefaction exceeds the eta cap under the guard policy."""
