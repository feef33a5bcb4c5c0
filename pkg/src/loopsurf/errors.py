"""Exception types shared across the package."""


class LoopsurfError(Exception):
    """Base class for all package errors."""


class TwistViolation(LoopsurfError):
    """A coefficient breaks the even/odd twist parity rule."""


class SingularLoop(LoopsurfError):
    """A loop evaluates to (numerically) singular matrices on the circle."""


class ConvergenceFailure(LoopsurfError):
    """A factorization residual stayed above tolerance."""


class OutsideBigCell(LoopsurfError):
    """Birkhoff splitting system is singular beyond the conditioning threshold."""


class InvalidParameter(LoopsurfError):
    """A potential constructor was given an out-of-range parameter."""


class UnsupportedMap(LoopsurfError):
    """Requested pullback map is outside the supported descriptor class."""


class PoleOnPath(LoopsurfError):
    """A grid node or integration ray passes within the pole margin."""

    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


class StepSizeUnderflow(LoopsurfError):
    """ODE integration could not reach the requested accuracy."""


class DegenerateMetric(LoopsurfError):
    """The induced metric vanishes at a node (branch point)."""


class OutOfDomain(LoopsurfError):
    """An automorphism maps too many nodes outside the sampled region."""


class PreconditionFailed(LoopsurfError):
    """A check was invoked with its stated precondition violated."""
