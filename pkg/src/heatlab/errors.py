"""Exception types raised across heatlab."""


class HeatlabError(Exception):
    """Base class for all heatlab errors."""


class DimensionMismatch(HeatlabError, ValueError):
    """A field does not live on the space it is used with."""


class KernelTruncationError(HeatlabError):
    """The image series cannot meet the requested tail bound within max_images."""

    def __init__(self, message, tail_bound):
        super().__init__(message)
        self.tail_bound = tail_bound


class SolverError(HeatlabError):
    """The intrinsic-distance program did not converge.

    ``lower_bound`` is the objective of the best strictly feasible witness found,
    so it is still a valid lower bound for the distance.
    """

    def __init__(self, message, lower_bound, witness=None):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.witness = witness


class NotInD0Error(HeatlabError, ValueError):
    """A weight function violates the energy-density constraint."""


class MetricDerivativeError(HeatlabError):
    """Difference quotients did not settle; ``quotients`` holds the raw sequence."""

    def __init__(self, message, quotients):
        super().__init__(message)
        self.quotients = quotients


class ConfigError(HeatlabError):
    """Experiment configuration or input file is invalid."""
