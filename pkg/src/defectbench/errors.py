"""Exception hierarchy for defectbench."""

from __future__ import annotations


class DefectbenchError(Exception):
    """Base class for every error raised by the workbench."""


class SpecError(DefectbenchError, ValueError):
    """Invalid chain, defect, subsystem or cut description."""


class ConfigError(SpecError):
    """Experiment configuration failed validation.

    ``problems`` holds one ``field: reason`` line per failing field.
    """

    def __init__(self, problems: list[str]) -> None:
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  {p}" for p in self.problems))


class OracleRangeError(SpecError):
    """System too large for the dense exact-diagonalization oracle."""


class NonConvergenceError(DefectbenchError):
    """An iterative kernel hit its iteration cap."""

    def __init__(self, message: str, *, residual: object, sweeps: int) -> None:
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(f"{message} (residual {residual}, {sweeps} sweeps)")


class SingularMatrixError(DefectbenchError):
    """Elimination met a pivot below the singularity threshold."""

    def __init__(self, pivot_index: int, pivot: object) -> None:
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"matrix is singular at pivot {pivot_index} (|pivot| = {pivot})")


class DomainError(DefectbenchError, ValueError):
    """A scalar function was evaluated outside its domain."""

    def __init__(self, message: str, value: object) -> None:
        self.value = value
        super().__init__(f"{message}: {value}")


class PrecisionEscalationError(DefectbenchError):
    """The working precision cannot resolve the requested quantity.

    ``required_digits`` is a suggested precision for the retry.
    """

    def __init__(self, message: str, *, required_digits: int, distance: object = None) -> None:
        self.required_digits = required_digits
        self.distance = distance
        super().__init__(f"{message}; raise decimal_digits to at least {required_digits}")
