"""Exception hierarchy shared by every scanthz module."""


class ScanThzError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ScanThzError, ValueError):
    pass


class ZeroReference(ScanThzError, ValueError):
    pass


class InvalidBlockSize(ScanThzError, ValueError):
    pass


class InvalidDims(ScanThzError, ValueError):
    pass


class InvalidK(InvalidDims):
    pass


class ZeroSignal(ScanThzError, ValueError):
    pass


class InvalidSpec(ScanThzError, ValueError):
    pass


class EmptyInput(ScanThzError, ValueError):
    pass


class FormatError(ScanThzError, ValueError):
    """Malformed CIM1/CSV payload or config file."""


class DegenerateInput(ScanThzError):
    """All-zero measurements; the solver short-circuits to a zero image."""


class SingularS(ScanThzError, ArithmeticError):
    pass


class NoImprovement(ScanThzError):
    """No block offers a negative cost change; the driver treats this as convergence."""


class NumericalFailure(ScanThzError, ArithmeticError):
    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration
