"""Exception types shared across the toolkit."""


class WassboundError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(WassboundError):
    pass


class GridTooSmall(WassboundError):
    pass


class NoFiniteExponentialMoment(WassboundError):
    pass


class SolverFailure(WassboundError):
    pass


class NotLipschitz(WassboundError):
    pass


class SupportMismatch(WassboundError):
    pass


class NonMonotoneCdf(WassboundError):
    pass


class Unbounded(WassboundError):
    pass


class ContractionOutOfRange(WassboundError):
    pass


class DomainError(WassboundError):
    pass


class RegimeViolation(WassboundError):
    pass


class WitnessTooFar(WassboundError):
    pass


class DisconnectedGraph(WassboundError):
    pass


class ConfigError(WassboundError):
    pass


class IoError(WassboundError):
    pass
