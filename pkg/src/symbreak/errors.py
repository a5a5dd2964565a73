from pathlib import Path


class SymbreakError(Exception):
    """Base class for every error raised by symbreak."""


class DimensionMismatchError(SymbreakError, ValueError):
    pass


class NonSquareMatrixError(DimensionMismatchError):
    pass


class AmbiguousGroupingError(SymbreakError, ValueError):
    """Eigenvalues chain through the grouping tolerance across distinct values."""


class UnknownEigenvalueError(SymbreakError, ValueError):
    pass


class GradingKindError(SymbreakError, ValueError):
    pass


class UndefinedMeasureError(SymbreakError, ValueError):
    """The normalization of a measure vanishes, so the measure is 0/0."""


class NonUnitaryTransformError(SymbreakError, ValueError):
    pass


class NonUnimodularEigenvalueError(SymbreakError, ValueError):
    pass


class NonConvergentSeriesError(SymbreakError, ArithmeticError):
    def __init__(self, message: str, remainder_estimate: float) -> None:
        super().__init__(message)
        self.remainder_estimate = remainder_estimate


class IllConditionedSystemError(SymbreakError, ArithmeticError):
    def __init__(self, message: str, condition: float) -> None:
        super().__init__(message)
        self.condition = condition


class TruncationConvergenceError(SymbreakError, ArithmeticError):
    def __init__(self, message: str, change: float) -> None:
        super().__init__(message)
        self.change = change


class SpecialFunctionDomainError(SymbreakError, ValueError):
    pass


class SingularTranslationError(SymbreakError, ValueError):
    pass


class FileFormatError(SymbreakError, ValueError):
    def __init__(
        self,
        message: str,
        path: Path | None = None,
        line_number: int | None = None,
    ) -> None:
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        elif line_number is not None:
            location = f"line {line_number}: "
        super().__init__(location + message)
        self.path = path
        self.line_number = line_number
