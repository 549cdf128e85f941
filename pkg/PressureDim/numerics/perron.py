"""
Perron-Frobenius data for small nonnegative matrices.

Primitive matrices go through power iteration with Collatz-Wielandt bounds
as the stopping test; anything else (reducible or periodic patterns, which
show up in extracted Markov subsystems) falls back to a dense eigenvalue solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import settings

logger = logging.getLogger(__name__)


def _pattern(matrix: np.ndarray) -> np.ndarray:
    return (np.asarray(matrix) > 0).astype(np.int64)


def wielandt_bound(m: int) -> int:
    return m * m - 2 * m + 2


def primitivity_power(matrix) -> Optional[int]:
    """Least k with matrix^k > 0 entrywise, or None when no such k exists."""
    pattern = _pattern(matrix)
    m = pattern.shape[0]
    power = pattern.copy()
    for k in range(1, wielandt_bound(m) + 1):
        if power.all():
            return k
        power = np.minimum(power @ pattern, 1)
    return None


def is_primitive_pattern(matrix) -> bool:
    """Primitivity by repeated squaring up to the Wielandt exponent."""
    pattern = _pattern(matrix)
    if not pattern.any(axis=1).all():
        return False
    bound = wielandt_bound(pattern.shape[0])
    power = pattern.copy()
    k = 1
    # once positive, stays positive (no zero rows)
    while k < bound:
        power = np.minimum(power @ power, 1)
        k *= 2
    return bool(power.all())


@dataclass(frozen=True)
class PerronData:
    root: float
    right: np.ndarray
    left: np.ndarray
    iterations: int


def _power_iteration(matrix: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int]:
    x = np.ones(matrix.shape[0])
    lo = hi = 0.0
    for iteration in range(1, max_iter + 1):
        y = matrix @ x
        ratios = y / x
        lo, hi = float(ratios.min()), float(ratios.max())
        x = y / y.sum()
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi), x, iteration
    logger.warning(
        "power iteration stopped after %d steps with Collatz-Wielandt gap %.3e",
        max_iter, hi - lo,
    )
    return 0.5 * (lo + hi), x, max_iter


def perron_data(matrix, tol: Optional[float] = None, max_iter: Optional[int] = None) -> PerronData:
    """Perron root with right and left eigenvectors (each summing to 1)."""
    tol = settings.POWER_ITERATION_TOL if tol is None else tol
    max_iter = settings.POWER_ITERATION_MAX_ITER if max_iter is None else max_iter
    matrix = np.asarray(matrix, dtype=float)
    root, right, steps_right = _power_iteration(matrix, tol, max_iter)
    _, left, steps_left = _power_iteration(matrix.T, tol, max_iter)
    logger.debug("perron root %.15g after %d/%d iterations", root, steps_right, steps_left)
    return PerronData(root=root, right=right, left=left, iterations=max(steps_right, steps_left))


def spectral_radius(matrix) -> float:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0 or not matrix.any():
        return 0.0
    if is_primitive_pattern(matrix):
        return perron_data(matrix).root
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))
