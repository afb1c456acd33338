"""Exception hierarchy shared across the package."""


class SwarmCbfError(Exception):
    """Base class for all package errors."""


class SingularPair(SwarmCbfError):
    """Pairwise barrier evaluated at (near-)zero separation."""


class DegenerateWeight(SwarmCbfError):
    """Asymmetric weight denominator too close to zero."""


class DimensionMismatch(SwarmCbfError):
    """Vectors of different dimensions were combined."""


class DegenerateConstraint(SwarmCbfError):
    """Linear constraint with a zero coefficient vector and a negative offset."""


class SpacingTooTight(SwarmCbfError):
    """Initial formation violates the safe-distance requirement."""


class NotOneDimensional(SwarmCbfError):
    """Operation defined only for 1D scenarios."""


class ValidationError(SwarmCbfError):
    """Configuration value violates an invariant."""


class FatalSimulationError(SwarmCbfError):
    """A trial aborted; carries the step index in the message."""
