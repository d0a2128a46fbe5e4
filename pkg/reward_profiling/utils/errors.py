class ProfilingError(Exception):
    """Base class for every error raised by reward_profiling."""


class DomainError(ProfilingError, ValueError):
    """A precondition of an operation was violated."""


class ConfigError(DomainError):
    pass


class PathCountExceeded(DomainError):
    pass


class NumericError(ProfilingError, ArithmeticError):
    """Non-finite values appeared where finite ones are required."""


class DivergedParametersError(NumericError):
    pass


class UnsupportedOperationError(ProfilingError, TypeError):
    pass


class ResultsIOError(ProfilingError, OSError):
    pass
