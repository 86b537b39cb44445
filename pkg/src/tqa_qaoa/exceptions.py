"""Exception hierarchy shared by every module."""


class TqaQaoaError(Exception):
    """Base class for all errors raised by this package."""


class InfeasibleError(TqaQaoaError, ValueError):
    """Arguments outside the domain where the operation is defined."""


class DegreeParityError(InfeasibleError):
    """A regular graph of the requested degree cannot exist (odd degree sum)."""


class CapacityError(TqaQaoaError, MemoryError):
    """The requested Hilbert space exceeds the configured memory budget."""


class DimensionMismatch(TqaQaoaError, ValueError):
    pass


class ParseError(TqaQaoaError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NonFiniteError(TqaQaoaError, FloatingPointError):
    pass


class NotDescentError(TqaQaoaError, ValueError):
    """Line search called along a direction that does not decrease the objective."""


class DegenerateError(TqaQaoaError, ValueError):
    """A scan carries no information (e.g. every ratio identical)."""
