"""Exception types shared across the package."""


class CurveDepthError(Exception):
    """Base class for all curvedepth errors."""


class NonConvergence(CurveDepthError):
    """Adaptive quadrature could not meet the requested tolerance.

    Carries the best value and error estimate reached so far.
    """

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class SingularEvaluation(CurveDepthError):
    """Covariance data violated det Sigma >= 0 beyond rounding noise.

    det Sigma >= 0 is a theorem for the Gaussian pair; a substantial
    violation signals an evaluation bug, not bad input data.
    """


class DegenerateSample(CurveDepthError):
    """A sampled curve cannot be processed reliably on the current mesh."""

    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class ExcessiveDiscards(CurveDepthError):
    """Too large a fraction of Monte Carlo trials was discarded."""
