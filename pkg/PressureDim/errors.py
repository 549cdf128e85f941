from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass
class DimensionError(Exception):
    """Base error with context for the reporting layer."""
    message: str
    field_path: Optional[str] = None

    exit_code = 3

    def __str__(self) -> str:
        if self.field_path:
            return f"{self.field_path}: {self.message}"
        return self.message


@dataclass
class ValidationError(DimensionError):
    """A system, measure or spec file violates its invariants."""

    exit_code = 2


@dataclass
class NumericError(DimensionError):
    """A computation could not deliver a certified value."""

    exit_code = 3


@dataclass
class RootNotBracketedError(NumericError):
    lower: Optional[float] = None
    upper: Optional[float] = None


@dataclass
class BudgetExceededError(NumericError):
    words: int = 0
    budget: int = 0
    suggested_n: Optional[int] = None

    def __str__(self) -> str:
        hint = f" (try n <= {self.suggested_n})" if self.suggested_n is not None else ""
        return f"{self.message}: {self.words} words > budget {self.budget}{hint}"


@dataclass
class ConfigurationError(DimensionError):
    exit_code = 2
