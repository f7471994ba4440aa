class SepkitError(Exception):
    """Base class of every error raised by sepkit."""


class ParameterError(SepkitError, ValueError):
    def __init__(self, name, reason):
        self.name = name
        message = f"Invalid parameter `{name}`: {reason}"
        super().__init__(message)


class DimensionMismatchError(ParameterError):
    def __init__(self, expected, actual, what="input"):
        self.expected = expected
        self.actual = actual
        super().__init__(
            what, f"expected dimension {expected}, got {actual}"
        )


class InsufficientDataError(SepkitError):
    def __init__(self, needed, got, what="points"):
        self.needed = needed
        self.got = got
        message = f"At least {needed} {what} are required, got {got}."
        super().__init__(message)


class NumericalError(SepkitError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)


class SingularityError(NumericalError):
    def __init__(self, min_eigenvalue, ridge):
        message = (
            f"Matrix is singular after ridge: min eigenvalue {min_eigenvalue:.3e} "
            f"+ ridge {ridge:.3e} <= 0. Regularize the input (increase the ridge)."
        )
        super().__init__(
            message, {"min_eigenvalue": min_eigenvalue, "ridge": ridge}
        )


class DegenerateDirectionError(NumericalError):
    def __init__(self):
        message = (
            "Fisher direction is undefined: the error mean equals the mean of the "
            "remaining points."
        )
        super().__init__(message)


class DegenerateDataError(SepkitError):
    def __init__(self, trace):
        message = (
            "Data is degenerate: every covariance eigenvalue is negligible "
            f"(trace {trace:.3e}). Are all points identical?"
        )
        super().__init__(message)


class ResampleExhaustedError(SepkitError):
    def __init__(self, attempts, condition):
        self.attempts = attempts
        message = (
            f"Could not satisfy {condition} after {attempts} attempts. "
            "Relax the correlation bounds."
        )
        super().__init__(message)


class FormatError(SepkitError):
    def __init__(self, path, reason):
        self.path = path
        message = f"Cannot read `{path}`: {reason}"
        super().__init__(message)
