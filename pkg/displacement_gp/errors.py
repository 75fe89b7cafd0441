"""Exception hierarchy shared by every displacement_gp module."""

from __future__ import annotations

from collections.abc import Sequence


class DisplacementGPError(Exception):
    """Base class for library errors; the CLI maps these to exit code 1."""


class DimensionError(DisplacementGPError, ValueError):
    pass


class DataError(DisplacementGPError, ValueError):
    pass


class SchemaError(DataError):
    def __init__(self, message: str, *, missing: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.missing = tuple(missing)


class ParseError(DataError):
    """Malformed cells collected over a whole file, one ``(line, message)`` each."""

    def __init__(self, problems: Sequence[tuple[int, str]], *, path: str | None = None) -> None:
        self.problems = tuple(problems)
        self.path = path
        head = "; ".join(f"line {line}: {msg}" for line, msg in self.problems[:10])
        more = f" (+{len(self.problems) - 10} more)" if len(self.problems) > 10 else ""
        where = f"{path}: " if path else ""
        super().__init__(f"{where}{len(self.problems)} malformed row(s): {head}{more}")


class IllConditionedKernelError(DisplacementGPError):
    pass


class OptimizationFailedError(DisplacementGPError):
    pass


class RunFailedError(DisplacementGPError):
    def __init__(self, run_index: int, cause: BaseException) -> None:
        super().__init__(f"run {run_index} failed: {cause}")
        self.run_index = run_index
        self.cause = cause


__all__ = [
    "DisplacementGPError",
    "DimensionError",
    "DataError",
    "SchemaError",
    "ParseError",
    "IllConditionedKernelError",
    "OptimizationFailedError",
    "RunFailedError",
]
