class SimulationError(Exception):
    """Generic simulation error."""


class InvalidInputError(SimulationError, ValueError):
    """Arguments outside the domain of an operation."""


class SolverDivergenceError(SimulationError):
    """Numerical failure: NaN, overflow or step-size underflow."""


class ConfigError(InvalidInputError):
    """Malformed run configuration, optionally anchored to a file line."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None) -> None:
        self.path = path
        self.line = line
        self.message = message
        super().__init__(self._anchored())

    def _anchored(self) -> str:
        if self.path and self.line:
            return f"{self.path}:{self.line}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message
