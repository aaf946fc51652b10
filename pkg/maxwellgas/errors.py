"""Exception hierarchy for maxwellgas.

Every error carries the process exit code the CLI reports for it, so the
runner can turn any failure into a machine-readable error document without
a lookup table.
"""


class MaxwellGasError(Exception):
    """Base class for all maxwellgas errors."""

    exit_code = 1

    def to_dict(self) -> dict:
        """Machine-readable form written to error.json."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ConfigError(MaxwellGasError, ValueError):
    """Scenario configuration could not be parsed or validated."""

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

    def to_dict(self) -> dict:
        doc = super().to_dict()
        doc["problems"] = self.problems
        return doc


class DomainError(MaxwellGasError, ValueError):
    """Input outside the domain of a physical relation or numerical scheme."""


class WindowTooShortError(DomainError):
    """Trajectory lookback does not cover the collision window."""


class PositivityError(MaxwellGasError, RuntimeError):
    """Density, temperature or occupation lost positivity during a run."""

    exit_code = 2

    def __init__(self, field: str, index: tuple, value: float, t: float):
        self.field = field
        self.index = tuple(int(i) for i in index)
        self.value = float(value)
        self.t = float(t)
        super().__init__(
            f"Non-positive {field} = {self.value:.6g} at cell {self.index} (t = {self.t:.6g})"
        )

    def to_dict(self) -> dict:
        doc = super().to_dict()
        doc.update(field=self.field, index=list(self.index), value=self.value, t=self.t)
        return doc


class ConvergenceError(MaxwellGasError, RuntimeError):
    """An iterative or adaptive numerical method did not reach its tolerance."""

    exit_code = 3


class QuadratureError(ConvergenceError):
    """Adaptive quadrature failed to meet the requested tolerance."""


class NormalizationError(QuadratureError):
    """Free-time density does not integrate to one within tolerance."""


class VerificationError(MaxwellGasError, RuntimeError):
    """One or more verification checks failed."""

    exit_code = 4

    def __init__(self, failed: list[str]):
        self.failed = list(failed)
        super().__init__(f"Verification failed: {', '.join(self.failed)}")


class ArtifactError(MaxwellGasError, FileNotFoundError):
    """A run directory is missing the artifacts an operation needs."""
