"""Bisection driver for decreasing pressure curves."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Tuple

from scipy import optimize

from config import settings
from PressureDim.errors import NumericError, RootNotBracketedError

logger = logging.getLogger(__name__)


def pressure_root(
    evaluator: Callable[[float], float],
    bracket: Tuple[float, float],
    tol: Optional[float] = None,
) -> float:
    """
    Zero of a monotone curve s -> P(s) inside `bracket`.

    Uses at most MAX_BISECTION_STEPS halvings. A curve that vanishes at an
    endpoint returns that endpoint.
    """
    tol = settings.ROOT_TOL if tol is None else tol
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo, f_hi = evaluator(lo), evaluator(hi)
    if math.isnan(f_lo) or math.isnan(f_hi):
        raise NumericError(f"pressure is undefined at the bracket [{lo}, {hi}]")
    if f_lo * f_hi > 0:
        raise RootNotBracketedError("root not bracketed", lower=lo, upper=hi)

    try:
        root, info = optimize.bisect(
            evaluator, lo, hi,
            xtol=tol, maxiter=settings.MAX_BISECTION_STEPS,
            full_output=True, disp=False,
        )
    except ValueError as exc:
        raise RootNotBracketedError("root not bracketed", lower=lo, upper=hi) from exc

    if not info.converged:
        raise NumericError(
            f"bisection did not reach tolerance {tol:g} in {settings.MAX_BISECTION_STEPS} steps"
        )
    logger.debug("root %.12g on [%g, %g] after %d steps", root, lo, hi, info.iterations)
    return float(root)


def clamped_root(evaluator: Callable[[float], float], lo: float, hi: float, tol: Optional[float] = None) -> float:
    """Like pressure_root, but a curve of constant sign pins the root to the nearer end."""
    if evaluator(lo) <= 0:
        return lo
    if evaluator(hi) >= 0:
        return hi
    return pressure_root(evaluator, (lo, hi), tol)
