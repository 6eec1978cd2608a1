"""Exception hierarchy for the interlinkage pipeline."""


class InterlinkError(Exception):
    """Base class for all pipeline errors."""


class LoadError(InterlinkError):
    pass


class InsufficientDataError(InterlinkError):
    pass


class RangeError(InterlinkError):
    pass


class DegenerateCorrelationError(InterlinkError):
    pass


class InsufficientSampleError(InterlinkError):
    pass


class ConsistencyError(InterlinkError):
    pass


class ParameterError(InterlinkError, ValueError):
    pass


class ContractViolation(InterlinkError):
    pass


class ConvergenceError(InterlinkError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SpecError(InterlinkError):
    pass
