"""
Empirical cross-checks

Box counting on point clouds and local dimension of a sampled measure.
These are estimates: they are compared with an analytic value, never used
to certify one.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from config import settings
from PressureDim.errors import NumericError, ValidationError

logger = logging.getLogger(__name__)

MIN_R_SQUARED = 0.99
MIN_LOCAL_SAMPLES = 100_000


@dataclass
class BoxCountProfile:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    warnings: List[str] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "delta": self.scales,
            "count": self.counts,
            "log_inv_delta": -np.log(self.scales),
            "log_count": np.log(self.counts),
        })

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "scales": self.scales.tolist(),
            "counts": self.counts.tolist(),
            "warnings": self.warnings,
        }


def _occupied_boxes(points: np.ndarray, delta: float) -> int:
    cells = np.floor(points / delta).astype(np.int64)
    cells -= cells.min(axis=0)
    keys = np.ravel_multi_index(cells.T, tuple(cells.max(axis=0) + 1))
    return int(np.unique(keys).size)


def box_count(points, scales: Optional[Sequence[float]] = None, workers: int = 1) -> BoxCountProfile:
    """
    Number of occupied grid boxes N(delta) per scale and the least-squares
    slope of log N(delta) against -log delta.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise ValidationError("no points to count", field_path="task.points")
    scales = np.asarray(settings.BOX_SCALES if scales is None else scales, dtype=float)
    if scales.size < 2:
        raise ValidationError("need ≥ 2 scales", field_path="task.scales")
    if (scales <= 0).any() or (scales >= 1).any():
        raise ValidationError("scales must lie in (0,1)", field_path="task.scales")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = np.array(list(pool.map(lambda delta: _occupied_boxes(points, delta), scales)))
    else:
        counts = np.array([_occupied_boxes(points, delta) for delta in scales])

    fit = stats.linregress(-np.log(scales), np.log(counts))
    profile = BoxCountProfile(
        scales=scales,
        counts=counts,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
    )
    if profile.r_squared < MIN_R_SQUARED:
        message = f"box-count fit is poor: R^2 = {profile.r_squared:.4f}"
        logger.warning(message)
        profile.warnings.append(message)
    logger.info("box-counting slope %.4f from %d points on %d scales", profile.slope, points.shape[0], scales.size)
    return profile


def local_dimension(samples, center, radii: Sequence[float]) -> Tuple[float, float]:
    """
    (min, max) of log(mu B(c, r_k) / mu B(c, r_{k+1})) / log(r_k / r_{k+1})
    over consecutive radii, with mu the empirical measure of `samples`.
    This is the slope form of log mu B(c, r) / log r.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    center = np.asarray(center, dtype=float).reshape(-1)
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    if radii.size < 2 or (radii <= 0).any() or (radii >= 1).any():
        raise ValidationError("need at least two radii in (0,1)", field_path="task.radii")
    if samples.shape[0] < MIN_LOCAL_SAMPLES:
        logger.warning("only %d samples; local dimension is unreliable below %d", samples.shape[0], MIN_LOCAL_SAMPLES)

    distance = np.linalg.norm(samples - center, axis=1)
    masses = np.array([(distance <= r).mean() for r in radii])
    if masses[0] == 0:
        raise NumericError("insufficient samples: the largest ball is empty")
    keep = masses > 0
    if not keep.all():
        logger.warning("dropping %d radii with empty balls", int((~keep).sum()))
    radii, masses = radii[keep], masses[keep]
    if radii.size < 2:
        raise NumericError("insufficient samples: fewer than two non-empty balls")

    quotients = np.log(masses[:-1] / masses[1:]) / np.log(radii[:-1] / radii[1:])
    return float(quotients.min()), float(quotients.max())


@dataclass
class Verdict:
    passed: bool
    analytic: float
    expected: float  # min(d, analytic)
    estimate: float
    tolerance: float
    r_squared: float
    warnings: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "passed": self.passed,
            "analytic": self.analytic,
            "expected": self.expected,
            "estimate": self.estimate,
            "tolerance": self.tolerance,
            "r_squared": self.r_squared,
            "warnings": self.warnings,
        }


def dimension_crosscheck(analytic: float, profile: BoxCountProfile, tol: float, ambient_dimension: int = 2) -> Verdict:
    if not math.isfinite(analytic):
        raise ValidationError("analytic dimension must be finite")
    expected = min(float(ambient_dimension), analytic)
    passed = abs(profile.slope - expected) <= tol
    verdict = Verdict(
        passed=passed,
        analytic=analytic,
        expected=expected,
        estimate=profile.slope,
        tolerance=tol,
        r_squared=profile.r_squared,
        warnings=list(profile.warnings),
    )
    logger.info("cross-check %s: estimate %.4f vs %.4f (tol %g)",
                "passed" if passed else "failed", profile.slope, expected, tol)
    return verdict
