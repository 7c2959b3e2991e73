"""Exception hierarchy shared by every procwass module."""


class ProcwassError(Exception):
    """Base class for all library errors."""


class NonFinite(ProcwassError, ValueError):
    pass


class DimensionMismatch(ProcwassError, ValueError):
    pass


class NotPSD(ProcwassError, ValueError):
    pass


class SingularCovariance(ProcwassError, ValueError):
    pass


class InfeasibleWeights(ProcwassError, ValueError):
    pass


class NotConverged(ProcwassError, RuntimeError):
    """Iterative solver stopped before meeting its tolerance.

    ``violation`` carries the final residual when the solver knows it.
    """

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class NumericalOverflow(ProcwassError, FloatingPointError):
    pass


class ParseError(ProcwassError, ValueError):
    """Malformed input file. ``path`` and ``line`` locate the problem."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
