"""Exceptions raised by the thermodynamic, estimation, and Monte Carlo code."""

from __future__ import annotations

from typing import Any, Optional, Sequence, Union

ErrorContextType = dict[str, Union[int, float, str, list[Any], None]]


class NrtlStudyError(Exception):
    """Base class for errors that are reported by the batch commands."""

    def error_context(self) -> ErrorContextType:
        """Return a dict suitable for logging context."""
        return {"error": self.__class__.__name__}


class DomainError(NrtlStudyError, ValueError):
    """An argument is outside the domain of the operation."""

    def __init__(self, name: str, value: Any, expected: str, *args, **kwargs):
        self.name = name
        self.value = value
        self.expected = expected
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return f"{self.name}={self.value!r} is invalid, expected {self.expected}."

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}("
            f"{self.name!r}, {self.value!r}, {self.expected!r})"
        )

    def error_context(self) -> ErrorContextType:
        return {
            "error": self.__class__.__name__,
            "argument": self.name,
            "value": repr(self.value),
            "expected": self.expected,
        }


class OutOfRangeError(DomainError):
    """A temperature is outside a component's validity range."""


class ConvergenceError(NrtlStudyError):
    """The bubble-point residual has no sign change in the bracket."""

    def __init__(
        self,
        bracket: tuple[float, float],
        residuals: tuple[float, float],
        x1L: Optional[float] = None,
        P: Optional[float] = None,
        *args,
        **kwargs,
    ):
        self.bracket = bracket
        self.residuals = residuals
        self.x1L = x1L
        self.P = P
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        low, high = self.bracket
        f_low, f_high = self.residuals
        return (
            f"No bubble point in [{low:.6g}, {high:.6g}] K"
            f" (residuals {f_low:.6g}, {f_high:.6g} Pa)"
            f" for x1L={self.x1L!r}, P={self.P!r}."
        )

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}({self.bracket!r}, {self.residuals!r},"
            f" x1L={self.x1L!r}, P={self.P!r})"
        )

    def error_context(self) -> ErrorContextType:
        return {
            "error": self.__class__.__name__,
            "bracket": list(self.bracket),
            "residuals": list(self.residuals),
            "x1L": self.x1L,
            "P": self.P,
        }


class NumericalError(NrtlStudyError):
    """A sensitivity entry is not finite."""

    def __init__(self, row: int, column: str, value: float, *args, **kwargs):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return (
            f"Non-finite sensitivity {self.value!r}"
            f" at row {self.row}, column {self.column}."
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.row}, {self.column!r}, {self.value!r})"

    def error_context(self) -> ErrorContextType:
        return {
            "error": self.__class__.__name__,
            "row": self.row,
            "column": self.column,
            "value": repr(self.value),
        }


class ModelEvaluationError(NrtlStudyError):
    """The response model failed for one experiment."""

    def __init__(self, experiment: int, cause: Exception, *args, **kwargs):
        self.experiment = experiment
        self.cause = cause
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return f"Model evaluation failed at experiment {self.experiment}: {self.cause}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.experiment}, {self.cause!r})"

    def error_context(self) -> ErrorContextType:
        context: ErrorContextType = {
            "error": self.__class__.__name__,
            "experiment": self.experiment,
            "cause": repr(self.cause),
        }
        if isinstance(self.cause, NrtlStudyError):
            for key, value in self.cause.error_context().items():
                context.setdefault(key, value)
        return context


class SingularMatrixError(NrtlStudyError):
    """The Fisher information matrix is too ill-conditioned to invert."""

    def __init__(self, condition_number: float, *args, **kwargs):
        self.condition_number = condition_number
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return (
            f"Fisher information matrix is singular"
            f" (condition number {self.condition_number:.3g})."
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.condition_number!r})"

    def error_context(self) -> ErrorContextType:
        return {
            "error": self.__class__.__name__,
            "condition_number": self.condition_number,
        }


class DesignError(NrtlStudyError):
    """Every multistart run of the design optimizer failed."""

    def __init__(self, diagnostics: Sequence[str], *args, **kwargs):
        self.diagnostics = list(diagnostics)
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return f"All {len(self.diagnostics)} design starts failed."

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.diagnostics!r})"

    def error_context(self) -> ErrorContextType:
        return {"error": self.__class__.__name__, "diagnostics": self.diagnostics}


class ConfigError(NrtlStudyError):
    """The run configuration is missing, unreadable, or invalid."""

    def __init__(self, path: str, problem: str, *args, **kwargs):
        self.path = path
        self.problem = problem
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return f"Invalid config at {self.path}: {self.problem}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.path!r}, {self.problem!r})"

    def error_context(self) -> ErrorContextType:
        return {
            "error": self.__class__.__name__,
            "path": self.path,
            "problem": self.problem,
        }


class FitNotConvergedError(NrtlStudyError):
    """The least squares solver stopped without meeting a tolerance."""

    def __init__(self, n_iter: int, message: str, *args, **kwargs):
        self.n_iter = n_iter
        self.message = message
        super().__init__(*args, **kwargs)

    def __str__(self) -> str:
        return f"Fit did not converge after {self.n_iter} evaluations: {self.message}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.n_iter}, {self.message!r})"

    def error_context(self) -> ErrorContextType:
        return {
            "error": self.__class__.__name__,
            "n_iter": self.n_iter,
            "solver_message": self.message,
        }
