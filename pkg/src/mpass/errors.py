"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; anything else surfaces as ValueError from input validation.
"""


class MpassError(Exception):
    """Base class for package-specific failures."""


class GridMismatchError(MpassError):
    """Two grids that must share a step or node lattice do not."""


class EndpointNotZeroError(MpassError):
    """Zero-extension requested for a trajectory whose period endpoints
    are not (numerically) zero."""


class UnknownExampleError(MpassError):
    """Builtin problem index out of range."""


class NonFiniteSampleError(MpassError):
    """A potential callable returned NaN or infinity at a finite probe."""

    def __init__(self, message, t=None, q=None):
        super().__init__(message)
        self.t = t
        self.q = q


class NonIntegrableSuspectedError(MpassError):
    """Adaptive truncation of the forcing norm failed to stabilize."""


class MissingConstantsError(MpassError):
    """An operation needs audited constants but none are attached."""


class ScalingDivergedError(MpassError):
    """Endpoint construction kept doubling the scale without reaching
    negative action beyond the barrier."""


class NotAdmissibleError(MpassError):
    """Geometry constants requested for a spec that failed admissibility."""

    def __init__(self, message, reasons=()):
        super().__init__(message)
        self.reasons = list(reasons)


class CollapsedPathError(MpassError):
    """The deformation path's maximum dropped below half the barrier
    level, which contradicts the mountain-pass geometry."""


class SingularJacobianError(MpassError):
    """Newton's linearized system could not be factorized."""


class DivergedError(MpassError):
    """Newton residuals grew over several consecutive damped steps."""


class WindowTooLargeError(MpassError):
    """Comparison window exceeds one of the half-periods."""


class LadderAbortedError(MpassError):
    """Two consecutive half-period entries failed to produce a solution."""

    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)
