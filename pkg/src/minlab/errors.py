"""Exception types shared across the package."""


class MinlabError(Exception):
    """Base class for all package-specific errors."""


class PointOutsideDomain(MinlabError):
    """A point was evaluated outside the function's domain."""


class SegmentExitsDomain(MinlabError):
    """An integration segment leaves the domain."""


class ToleranceNotReached(MinlabError):
    """Adaptive quadrature hit maximum depth before the error target."""

    def __init__(self, message, best=None, err=None):
        super().__init__(message)
        self.best = best
        self.err = err


class NotZeroFree(MinlabError):
    """A function required to be zero-free could not be validated as such."""


class GaussMapZero(MinlabError):
    """The Gauss map vanishes at a queried point or on an integration path."""


class IdenticallyZero(MinlabError):
    """An input function is identically zero where a nonzero one is required."""


class ConstraintViolated(MinlabError):
    """Geometric parameters violate a construction constraint."""


class ZeroDetected(MinlabError):
    """A sampled minimum fell below the zero-detection threshold."""


class IllConditioned(MinlabError):
    """A least-squares system was too ill-conditioned to trust."""


class DegreeExhausted(MinlabError):
    """Degree escalation ended without a valid certificate.

    Carries the best exponent/function found so callers may still use it
    under their own measured gates.
    """

    def __init__(self, message, best_h=None, errors=None, degree=None):
        super().__init__(message)
        self.best_h = best_h
        self.errors = errors
        self.degree = degree


class StepFailed(MinlabError):
    """A pipeline step could not satisfy its property gates."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigInvalid(MinlabError):
    """A CLI configuration file failed to parse or validate."""
