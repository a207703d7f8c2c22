"""Exception types shared across the package."""


class QpfError(Exception):
    """Base class for all package errors."""


class DomainExit(QpfError):
    """A fibre-map image left the declared domain."""


class EBelowThreshold(QpfError):
    """Energy too small for the interval model to have two positive fixed points."""


class NoValidL(QpfError):
    """No pair of consecutive integers outside the recurrence set exists in range."""


class NotAdmissible(QpfError):
    """The requested time is not admissible."""


class NotInvariant(QpfError):
    """A sampled graph fails the invariance residual check."""


class InverseOutOfRange(QpfError):
    """A fibre-map preimage does not exist in the domain."""


class NoBasinBoundary(QpfError):
    """Every tested point converges to the lower graph."""


class GridMismatch(QpfError):
    """Two graph samples live on different grids."""


class NotMonotone(QpfError):
    """The family is not monotone in the parameter; use the symmetric solver."""


class TargetUnreachable(QpfError):
    """The target value is not attained on the parameter bracket."""


class NoCrossing(QpfError):
    """A scan found no parameter at which the orbit crosses the target."""


class SolveFailed(QpfError):
    """A parameter solve could not be completed."""


class Inconclusive(QpfError):
    """Exponent estimates straddle the classification threshold."""


class ChainTooShort(QpfError):
    """A tracked peak chain has fewer than two members."""


class TooManyPoints(QpfError):
    """A plot request exceeds the point budget."""


class ConfigError(QpfError):
    """Invalid experiment configuration; the message names the field path."""
