"""
Symbolic dynamics core

- Subshifts of finite type given by a 0/1 transition matrix
- Bernoulli and Markov measures on them, with entropy and word sampling
- Parry measure (maximal entropy) and topological entropy from Perron data
- Lap-number entropy of piecewise affine interval maps

Words are 1-based in every public signature (symbol 1 is the first row of the
transition matrix); numpy arrays handed between modules are 0-based.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr

from config import settings
from PressureDim.errors import ValidationError
from PressureDim.numerics.perron import perron_data, primitivity_power

logger = logging.getLogger(__name__)

STATIONARITY_TOL = 1e-12


# ----------------------------
# Subshifts
# ----------------------------

@dataclass(frozen=True, eq=False)
class SubshiftFiniteType:
    """Alphabet {1..m} with admissible transitions transition[i, j] == 1."""
    transition: np.ndarray

    def __post_init__(self):
        try:
            matrix = np.asarray(self.transition)
        except ValueError:
            raise ValidationError("transition matrix must be square and non-empty", field_path="system.transition") from None
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise ValidationError("transition matrix must be square and non-empty", field_path="system.transition")
        if not np.isin(matrix, (0, 1)).all():
            raise ValidationError("transition matrix must contain only 0/1 entries", field_path="system.transition")
        matrix = matrix.astype(np.int64)
        if not matrix.any(axis=1).all() or not matrix.any(axis=0).all():
            raise ValidationError("every symbol needs a successor and a predecessor", field_path="system.transition")
        matrix.setflags(write=False)
        object.__setattr__(self, "transition", matrix)

    @classmethod
    def full_shift(cls, m: int) -> "SubshiftFiniteType":
        return cls(np.ones((m, m), dtype=np.int64))

    @property
    def alphabet_size(self) -> int:
        return self.transition.shape[0]

    def is_admissible(self, word: Sequence[int]) -> bool:
        symbols = np.asarray(word, dtype=np.int64) - 1
        if symbols.size == 0:
            return True
        if symbols.min() < 0 or symbols.max() >= self.alphabet_size:
            raise ValidationError(f"symbol out of range in word {tuple(word)}")
        return bool(self.transition[symbols[:-1], symbols[1:]].all())

    def word_count(self, n: int) -> int:
        """Number of admissible words of length n (exact integer arithmetic)."""
        row = np.ones(self.alphabet_size, dtype=object)
        matrix = self.transition.astype(object)
        for _ in range(n - 1):
            row = row.dot(matrix)
        return int(sum(row))


def is_primitive(sft: SubshiftFiniteType) -> Tuple[bool, Optional[int]]:
    power = primitivity_power(sft.transition)
    return power is not None, power


def require_primitive(sft: SubshiftFiniteType) -> None:
    if primitivity_power(sft.transition) is None:
        raise ValidationError("not primitive", field_path="system.transition")


def topological_entropy(sft: SubshiftFiniteType) -> float:
    """log of the Perron root of the transition matrix, in nats."""
    require_primitive(sft)
    return math.log(perron_data(sft.transition).root)


# ----------------------------
# Measures
# ----------------------------

@dataclass(frozen=True, eq=False)
class ErgodicMeasureSpec:
    """Bernoulli(p) or stationary Markov(p, P) measure on a subshift."""
    kind: str  # "bernoulli" | "markov"
    p: np.ndarray
    host: SubshiftFiniteType
    P: Optional[np.ndarray] = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        m = self.host.alphabet_size
        if self.kind not in ("bernoulli", "markov"):
            raise ValidationError(f"unknown measure kind {self.kind!r}", field_path="measure.kind")
        if p.shape != (m,):
            raise ValidationError(f"expected {m} probabilities, got {p.size}", field_path="measure.p")
        if (p < 0).any() or abs(p.sum() - 1.0) > STATIONARITY_TOL:
            raise ValidationError("probabilities must be non-negative and sum to 1", field_path="measure.p")
        object.__setattr__(self, "p", p)

        if self.kind == "bernoulli":
            if not self.host.transition.all():
                raise ValidationError("Bernoulli measures live on the full shift", field_path="measure")
            return

        P = np.asarray(self.P, dtype=float)
        if P.shape != (m, m):
            raise ValidationError("transition probabilities must be m x m", field_path="measure.P")
        if (P < 0).any() or np.abs(P.sum(axis=1) - 1.0).max() > STATIONARITY_TOL:
            raise ValidationError("rows of P must be probability vectors", field_path="measure.P")
        if ((P > 0) & (self.host.transition == 0)).any():
            raise ValidationError("P charges a forbidden transition", field_path="measure.P")
        if np.abs(p @ P - p).max() > STATIONARITY_TOL:
            raise ValidationError("p is not stationary for P", field_path="measure.p")
        object.__setattr__(self, "P", P)

    @classmethod
    def bernoulli(cls, p: Sequence[float]) -> "ErgodicMeasureSpec":
        return cls("bernoulli", np.asarray(p, dtype=float), SubshiftFiniteType.full_shift(len(p)))

    @classmethod
    def markov(cls, p: Sequence[float], P, host: Optional[SubshiftFiniteType] = None) -> "ErgodicMeasureSpec":
        P = np.asarray(P, dtype=float)
        if host is None:
            host = SubshiftFiniteType((P > 0).astype(np.int64))
        return cls("markov", np.asarray(p, dtype=float), host, P)

    @property
    def alphabet_size(self) -> int:
        return self.host.alphabet_size

    @property
    def transition_probabilities(self) -> np.ndarray:
        if self.kind == "bernoulli":
            return np.tile(self.p, (self.alphabet_size, 1))
        return self.P

    def cylinder_log_mass(self, words: np.ndarray) -> np.ndarray:
        """log mu[w] for rows of 0-based words; -inf on null cylinders."""
        words = np.atleast_2d(words)
        with np.errstate(divide="ignore"):
            log_p = np.log(self.p)
            log_P = np.log(self.transition_probabilities)
        mass = log_p[words[:, 0]]
        if words.shape[1] > 1:
            mass = mass + log_P[words[:, :-1], words[:, 1:]].sum(axis=1)
        return mass

    def sample_words(self, uniforms: np.ndarray) -> np.ndarray:
        """Turn a (count, n) array of U(0,1) draws into 0-based sample words."""
        uniforms = np.atleast_2d(uniforms)
        count, n = uniforms.shape
        first = np.cumsum(self.p)
        rows = np.cumsum(self.transition_probabilities, axis=1)
        words = np.empty((count, n), dtype=np.int64)
        last = self.alphabet_size - 1
        words[:, 0] = np.minimum(np.searchsorted(first, uniforms[:, 0], side="right"), last)
        if self.kind == "bernoulli":
            words[:, 1:] = np.minimum(np.searchsorted(first, uniforms[:, 1:], side="right"), last)
            return words
        for k in range(1, n):
            cum = rows[words[:, k - 1]]
            words[:, k] = np.minimum((cum <= uniforms[:, k, None]).sum(axis=1), last)
        return words


def entropy(measure: ErgodicMeasureSpec) -> float:
    """Kolmogorov-Sinai entropy in nats (0 log 0 = 0)."""
    if measure.kind == "bernoulli":
        return float(entr(measure.p).sum())
    return float((measure.p[:, None] * entr(measure.P)).sum())


def parry_measure(sft: SubshiftFiniteType) -> ErgodicMeasureSpec:
    """Maximal-entropy Markov measure: p_i = u_i v_i, P_ij = a_ij v_j / (lambda v_i)."""
    require_primitive(sft)
    return weighted_parry(sft, sft.transition.astype(float))


def weighted_parry(sft: SubshiftFiniteType, weighted: np.ndarray) -> ErgodicMeasureSpec:
    data = perron_data(weighted)
    u = data.left / data.left.sum()
    v = data.right / (u @ data.right)
    P = weighted * v[None, :] / (data.root * v[:, None])
    # row sums carry the power-iteration residual
    P = P / P.sum(axis=1, keepdims=True)
    p = u * v
    p = p / p.sum()
    return ErgodicMeasureSpec.markov(p, P, host=sft)


def information_rate(measure: ErgodicMeasureSpec, n: int, samples: int, seed: int) -> Tuple[float, float]:
    """
    Mean and standard error of -(1/n) log mu[w|n] over sampled words.

    Concentrates at the entropy of the measure.
    """
    rng = np.random.default_rng(seed)
    words = measure.sample_words(rng.random((samples, n)))
    rates = -measure.cylinder_log_mass(words) / n
    return float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0


# ----------------------------
# Lap entropy
# ----------------------------

@dataclass(frozen=True)
class AffineBranch:
    left: float
    right: float
    slope: float
    intercept: float

    def __call__(self, x):
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """Interval map of [0,1] with an affine monotone branch on each partition interval."""
    branches: Tuple[AffineBranch, ...] = field(default_factory=tuple)

    def __post_init__(self):
        branches = tuple(sorted(self.branches, key=lambda b: b.left))
        tol = settings.INTERVAL_TOL
        if not branches:
            raise ValidationError("map needs at least one branch", field_path="map.branches")
        for i, branch in enumerate(branches):
            if branch.right <= branch.left:
                raise ValidationError(f"branch {i + 1} has an empty interval", field_path=f"map.branches[{i}]")
            if branch.slope == 0:
                raise ValidationError(f"branch {i + 1} is constant", field_path=f"map.branches[{i}]")
            if i and branch.left < branches[i - 1].right - tol:
                raise ValidationError("overlapping partition intervals", field_path=f"map.branches[{i}]")
        object.__setattr__(self, "branches", branches)

    @classmethod
    def from_breakpoints(cls, points: Sequence[float], slopes: Sequence[float], intercepts: Sequence[float]):
        return cls(tuple(
            AffineBranch(points[i], points[i + 1], slopes[i], intercepts[i]) for i in range(len(slopes))
        ))

    @classmethod
    def tent(cls, slope: float = 2.0) -> "PiecewiseAffineMap":
        return cls.from_breakpoints([0.0, 0.5, 1.0], [slope, -slope], [0.0, slope])


def lap_counts(interval_map: PiecewiseAffineMap, n_max: int) -> List[int]:
    """Number of maximal monotonicity intervals of T^n for n = 1..n_max."""
    tol = settings.INTERVAL_TOL
    lefts = np.array([b.left for b in interval_map.branches])
    rights = np.array([b.right for b in interval_map.branches])
    slopes = np.array([b.slope for b in interval_map.branches])
    intercepts = np.array([b.intercept for b in interval_map.branches])

    counts = [_count_laps(lefts, rights, slopes, intercepts, tol)]
    a, b, k, c = lefts, rights, slopes, intercepts
    for _ in range(1, n_max):
        ya, yb = k * a + c, k * b + c
        lo, hi = np.minimum(ya, yb), np.maximum(ya, yb)
        parts = []
        for left, right, slope, intercept in zip(lefts, rights, slopes, intercepts):
            ov_lo, ov_hi = np.maximum(lo, left), np.minimum(hi, right)
            keep = ov_hi - ov_lo > tol
            x1 = (ov_lo[keep] - c[keep]) / k[keep]
            x2 = (ov_hi[keep] - c[keep]) / k[keep]
            parts.append((
                np.minimum(x1, x2), np.maximum(x1, x2),
                slope * k[keep], slope * c[keep] + intercept,
            ))
        a, b, k, c = (np.concatenate(col) for col in zip(*parts))
        order = np.argsort(a, kind="stable")
        a, b, k, c = a[order], b[order], k[order], c[order]
        counts.append(_count_laps(a, b, k, c, tol))
        logger.debug("lap count %d at level %d", counts[-1], len(counts))
    return counts


def _count_laps(a, b, k, c, tol) -> int:
    if a.size == 0:
        return 0
    start, end = k * a + c, k * b + c
    same = np.sign(k[1:]) == np.sign(k[:-1])
    rising = k[1:] > 0
    ordered = np.where(rising, end[:-1] <= start[1:] + tol, end[:-1] >= start[1:] - tol)
    adjacent = np.abs(a[1:] - b[:-1]) <= tol
    return int(1 + np.count_nonzero(~(same & ordered & adjacent)))


def lap_entropy(interval_map: PiecewiseAffineMap, n_max: int) -> float:
    """(1/n) log l(T^n) at n = n_max."""
    if n_max < 1:
        raise ValidationError("n_max must be >= 1", field_path="task.n_max")
    laps = lap_counts(interval_map, n_max)[-1]
    return math.log(laps) / n_max if laps > 0 else 0.0
