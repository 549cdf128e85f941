"""Word enumeration with the global product budget."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from config import settings
from PressureDim.errors import BudgetExceededError, ValidationError


def check_budget(m: int, n: int, budget: Optional[int] = None) -> int:
    """Return m**n, or raise when it exceeds the word budget."""
    budget = settings.WORD_BUDGET if budget is None else budget
    if n < 1:
        raise ValidationError(f"word length must be >= 1, got {n}", field_path="task.n")
    words = m ** n
    if words > budget:
        suggested = max(1, int(math.log(budget) / math.log(m))) if m > 1 else None
        raise BudgetExceededError(
            "word budget exceeded", words=words, budget=budget, suggested_n=suggested,
        )
    return words


def all_words(m: int, n: int) -> np.ndarray:
    """All m**n words of length n as rows of 0-based symbols, lexicographic order."""
    count = check_budget(m, n)
    return np.stack(np.unravel_index(np.arange(count), (m,) * n), axis=1)


def admissible_rows(transition: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Boolean mask of rows of `words` allowed by a 0/1 transition matrix."""
    if words.shape[1] < 2:
        return np.ones(words.shape[0], dtype=bool)
    allowed = transition[words[:, :-1], words[:, 1:]] > 0
    return allowed.all(axis=1)
