"""
Thermodynamic formalism for locally constant potentials and matrix cocycles

Additive pressure and Gibbs measures of depth-1 potentials on a subshift,
the singular value function, the subadditive pressure of a matrix family and
the affinity dimension as the zero of its upper envelope.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from config import settings
from PressureDim.errors import NumericError, ValidationError
from PressureDim.numerics.perron import perron_data, spectral_radius
from PressureDim.numerics.roots import clamped_root, pressure_root
from PressureDim.numerics.words import all_words, admissible_rows, check_budget
from PressureDim.reports import DimensionReport
from PressureDim.symbolic_core import (
    ErgodicMeasureSpec,
    SubshiftFiniteType,
    require_primitive,
    weighted_parry,
)

logger = logging.getLogger(__name__)

__all__ = [
    "DepthOnePotential",
    "GibbsMeasure",
    "PressureCurve",
    "PressureSample",
    "SingularValueProfile",
    "SubadditivePressure",
    "additive_pressure",
    "affinity_dimension",
    "gibbs_markov_measure",
    "pressure_curve",
    "pressure_root",
    "singular_value_function",
    "spectral_pressure",
    "subadditive_pressure",
]


# ----------------------------
# Potentials and additive pressure
# ----------------------------

@dataclass(frozen=True, eq=False)
class DepthOnePotential:
    """phi(x) = values[x_1 - 1]: constant on first-level cylinders."""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or not np.isfinite(values).all():
            raise ValidationError("potential values must be a finite vector", field_path="system.potential")
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls, m: int) -> "DepthOnePotential":
        return cls(np.zeros(m))

    @classmethod
    def from_ratios(cls, ratios: Sequence[float], s: float) -> "DepthOnePotential":
        return cls(s * np.log(np.asarray(ratios, dtype=float)))

    def scaled(self, s: float) -> "DepthOnePotential":
        return DepthOnePotential(s * self.values)


def _weighted_matrix(sft: SubshiftFiniteType, phi: DepthOnePotential) -> np.ndarray:
    if phi.values.size != sft.alphabet_size:
        raise ValidationError(
            f"potential has {phi.values.size} values for {sft.alphabet_size} symbols",
            field_path="system.potential",
        )
    return sft.transition * np.exp(phi.values)[None, :]


def spectral_pressure(sft: SubshiftFiniteType, phi: DepthOnePotential) -> float:
    """log rho(B), B_ij = A_ij exp(phi(j))."""
    require_primitive(sft)
    return math.log(spectral_radius(_weighted_matrix(sft, phi)))


def additive_pressure(sft: SubshiftFiniteType, phi: DepthOnePotential, n: int) -> float:
    """(1/n) log of the sum of exp(S_n phi) over admissible n-words."""
    require_primitive(sft)
    if n < 1:
        raise ValidationError("n must be >= 1", field_path="task.n")
    weights = np.exp(phi.values)
    B = _weighted_matrix(sft, phi)
    # w^T B^(n-1) 1 with running renormalisation
    row = weights.copy()
    log_scale = 0.0
    for _ in range(n - 1):
        row = row @ B
        total = row.sum()
        log_scale += math.log(total)
        row = row / total
    return (log_scale + math.log(row.sum())) / n


@dataclass(frozen=True)
class GibbsMeasure:
    measure: ErgodicMeasureSpec
    pressure: float
    c1: float
    c2: float
    level: int


def gibbs_markov_measure(sft: SubshiftFiniteType, phi: DepthOnePotential) -> GibbsMeasure:
    """
    Markov measure from the Perron data of B_ij = A_ij exp(phi(j)).

    The Gibbs constants are the extreme values of mu[w] / exp(-l P + S_l phi)
    over every admissible cylinder up to GIBBS_CHECK_LEVEL (or the deepest
    level the word budget allows).
    """
    require_primitive(sft)
    B = _weighted_matrix(sft, phi)
    measure = weighted_parry(sft, B)
    pressure = math.log(perron_data(B).root)

    m = sft.alphabet_size
    level = settings.GIBBS_CHECK_LEVEL
    if m > 1:
        level = min(level, int(math.log(settings.WORD_BUDGET) / math.log(m)))
    c1, c2 = math.inf, -math.inf
    for length in range(1, level + 1):
        words = all_words(m, length)
        words = words[admissible_rows(sft.transition, words)]
        log_ratio = (
            measure.cylinder_log_mass(words)
            + length * pressure
            - phi.values[words].sum(axis=1)
        )
        c1 = min(c1, float(np.exp(log_ratio.min())))
        c2 = max(c2, float(np.exp(log_ratio.max())))
    logger.debug("Gibbs constants c1=%.6g c2=%.6g to level %d", c1, c2, level)
    return GibbsMeasure(measure=measure, pressure=pressure, c1=c1, c2=c2, level=level)


# ----------------------------
# Singular value function
# ----------------------------

def _log_phi(log_alphas: np.ndarray, s: float) -> np.ndarray:
    """log phi^s from rows of log singular values sorted descending."""
    d = log_alphas.shape[-1]
    if s > d:
        return (s / d) * log_alphas.sum(axis=-1)
    k = int(math.floor(s))
    value = log_alphas[..., :k].sum(axis=-1)
    if k < d:
        value = value + (s - k) * log_alphas[..., k]
    return value


@dataclass(frozen=True, eq=False)
class SingularValueProfile:
    values: np.ndarray  # alpha_1 >= ... >= alpha_d > 0

    @classmethod
    def of(cls, matrix) -> "SingularValueProfile":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("matrix must be square")
        if np.linalg.matrix_rank(matrix) < matrix.shape[0]:
            raise ValidationError("rank-deficient")
        return cls(np.linalg.svd(matrix, compute_uv=False))

    @property
    def dimension(self) -> int:
        return self.values.size

    def function(self, s: float) -> float:
        if s < 0:
            raise ValidationError("s must be non-negative")
        return float(np.exp(_log_phi(np.log(self.values), s)))


def singular_value_function(matrix, s: float) -> float:
    return SingularValueProfile.of(matrix).function(s)


# ----------------------------
# Subadditive pressure
# ----------------------------

class SubadditivePressure:
    """
    Level-k sums of phi^s over all products A_w, |w| = k <= n.

    Singular values of every product are computed once; each evaluation in s
    is then a vectorised log-sum-exp per level.
    """

    def __init__(self, matrices: Sequence, n: int = 1):
        stack = np.asarray(matrices, dtype=float)
        if stack.ndim == 2:
            stack = stack[None]
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
            raise ValidationError("matrices must be a list of square d x d arrays", field_path="system.matrices")
        for i, matrix in enumerate(stack):
            if np.linalg.matrix_rank(matrix) < matrix.shape[0]:
                raise ValidationError("rank-deficient", field_path=f"system.matrices[{i}]")
        self.matrices = stack
        self.m, self.d = stack.shape[0], stack.shape[1]
        self._products = stack
        self._log_alphas: List[np.ndarray] = [np.log(np.linalg.svd(stack, compute_uv=False))]
        self.extend_to(n)

    @property
    def n(self) -> int:
        return len(self._log_alphas)

    def extend_to(self, n: int) -> None:
        if n < 1:
            raise ValidationError("n must be >= 1", field_path="task.n")
        if n > self.n:
            check_budget(self.m, n)
        while self.n < n:
            products = np.einsum("wij,ajk->waik", self._products, self.matrices)
            self._products = products.reshape(-1, self.d, self.d)
            self._log_alphas.append(np.log(np.linalg.svd(self._products, compute_uv=False)))
            logger.debug("subadditive pressure: level %d, %d products", self.n, self._products.shape[0])

    def estimates(self, s: float) -> np.ndarray:
        """(1/k) log sum phi^s(A_w) for k = 1..n."""
        return np.array([
            logsumexp(_log_phi(log_alphas, s)) / k
            for k, log_alphas in enumerate(self._log_alphas, start=1)
        ])

    def estimate(self, s: float) -> float:
        return float(self.estimates(s)[-1])

    def upper(self, s: float) -> float:
        return float(self.estimates(s).min())


def subadditive_pressure(matrices: Sequence, s: float, n: int) -> Tuple[float, float]:
    """(upper, estimate): min over levels k <= n, and the level-n value."""
    estimates = SubadditivePressure(matrices, n).estimates(s)
    return float(estimates.min()), float(estimates[-1])


def affinity_dimension(matrices: Sequence, tol: Optional[float] = None) -> DimensionReport:
    """
    Zero of the upper subadditive pressure envelope on [0, 2d].

    Levels are added until two successive roots agree within `tol` or the
    word budget stops the search. The root at the deepest level is a
    certified upper bound; the bracket widens it downwards by the last change.
    """
    tol = settings.AFFINITY_BRACKET_TOL if tol is None else tol
    table = SubadditivePressure(matrices, 1)
    hi = 2.0 * table.d
    previous = None
    root = clamped_root(table.upper, 0.0, hi, tol=settings.ROOT_TOL / 2)
    change = math.inf
    budget_hit = False
    while True:
        if previous is not None:
            change = abs(previous - root)
            if change < tol:
                break
        try:
            table.extend_to(table.n + 1)
        except NumericError:
            budget_hit = True
            break
        previous = root
        root = clamped_root(table.upper, 0.0, hi, tol=settings.ROOT_TOL / 2)
        logger.debug("affinity root at level %d: %.12f", table.n, root)

    slack = settings.ROOT_TOL
    spread = change if math.isfinite(change) else 0.0
    lower = max(0.0, root - spread - slack)
    upper = root + slack
    notes = []
    if budget_hit:
        notes.append(f"word budget reached at level {table.n}; bracket not converged to {tol:g}")
    logger.info("affinity dimension %.10f (level %d)", root, table.n)
    return DimensionReport(
        kind="affinity",
        value=root,
        bracket=(lower, upper),
        ambient_dimension=table.d,
        n=table.n,
        certified_upper=upper,
        notes=notes,
    )


# ----------------------------
# Pressure curves
# ----------------------------

@dataclass
class PressureSample:
    s: float
    lower: float
    upper: float


@dataclass
class PressureCurve:
    samples: List[PressureSample] = field(default_factory=list)
    root: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None

    @property
    def width(self) -> Optional[float]:
        if self.bracket is None:
            return None
        return self.bracket[1] - self.bracket[0]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(p.s, p.lower, p.upper) for p in self.samples], columns=["s", "lower", "upper"],
        )

    def to_dict(self):
        return {
            "samples": [[p.s, p.lower, p.upper] for p in self.samples],
            "root": self.root,
            "bracket": list(self.bracket) if self.bracket else None,
        }


def pressure_curve(
    evaluator: Callable[[float], Tuple[float, float]],
    s_grid: Sequence[float],
    root_range: Optional[Tuple[float, float]] = None,
) -> PressureCurve:
    """Sample (lower, upper) bounds on a grid and bracket the zero between the two envelopes."""
    samples = []
    for s in s_grid:
        lower, upper = evaluator(float(s))
        samples.append(PressureSample(float(s), float(lower), float(upper)))
    curve = PressureCurve(samples=samples)

    lo, hi = root_range or (float(s_grid[0]), float(s_grid[-1]))
    try:
        s_lo = clamped_root(lambda s: evaluator(s)[0], lo, hi)
        s_hi = clamped_root(lambda s: evaluator(s)[1], lo, hi)
    except NumericError as exc:
        logger.warning("pressure curve has no root on [%g, %g]: %s", lo, hi, exc)
        return curve
    curve.bracket = (s_lo, s_hi)
    curve.root = 0.5 * (s_lo + s_hi)
    return curve
