"""
Self-similar iterated function systems

S_i(x) = r_i O_i x + t_i on R^d. Similarity dimension, natural projection,
chaos-game attractors, self-similar measures and the overlap diagnostics on
the line (the level-n separation Delta_n and exact overlaps).

Ratios and translations may be given as fractions.Fraction; on the line the
overlap diagnostics then compare words exactly instead of to 1e-12.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import logsumexp, xlogy

from config import settings
from PressureDim.errors import ValidationError
from PressureDim.numerics.chaos import chaos_game
from PressureDim.numerics.roots import pressure_root
from PressureDim.numerics.words import all_words, check_budget

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-12
COINCIDENCE_TOL = 1e-12

Word = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SimilarIFS:
    """Similarities r_i O_i x + t_i, addressed by `labels` (1..m unless given)."""
    ratios: Tuple
    translations: Tuple
    orthogonals: Optional[np.ndarray] = None
    labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        ratios = tuple(self.ratios)
        m = len(ratios)
        if m == 0:
            raise ValidationError("ratios must not be empty", field_path="system.ratios")
        for i, r in enumerate(ratios):
            if not 0 < r < 1:
                raise ValidationError(f"ratio {r} not in (0,1)", field_path=f"system.ratios[{i}]")

        translations = tuple(
            tuple(t) if isinstance(t, (list, tuple, np.ndarray)) else (t,) for t in self.translations
        )
        if len(translations) != m:
            raise ValidationError(f"expected {m} translations, got {len(translations)}", field_path="system.translations")
        d = len(translations[0])
        if any(len(t) != d for t in translations):
            raise ValidationError("translations must share one dimension", field_path="system.translations")

        if self.orthogonals is None:
            orthogonals = np.tile(np.eye(d), (m, 1, 1))
        else:
            try:
                orthogonals = np.asarray(self.orthogonals, dtype=float).reshape(m, d, d)
            except ValueError:
                raise ValidationError(f"expected {m} orthogonal {d}x{d} matrices", field_path="system.orthogonals") from None
        for i, O in enumerate(orthogonals):
            if np.abs(O.T @ O - np.eye(d)).max() > ORTHOGONALITY_TOL:
                raise ValidationError("linear part is not orthogonal", field_path=f"system.orthogonals[{i}]")

        labels = tuple(range(1, m + 1)) if self.labels is None else tuple(int(s) for s in self.labels)
        if len(labels) != m or len(set(labels)) != m:
            raise ValidationError("labels must be distinct, one per map", field_path="system.labels")

        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "translations", translations)
        object.__setattr__(self, "orthogonals", orthogonals)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def on_line(cls, ratios, translations, flips=None, labels=None) -> "SimilarIFS":
        """Maps x -> +-r_i x + t_i; `flips[i]` reverses orientation."""
        signs = [-1.0 if flip else 1.0 for flip in (flips or [False] * len(ratios))]
        return cls(tuple(ratios), tuple(translations), np.array(signs).reshape(-1, 1, 1), labels)

    @property
    def m(self) -> int:
        return len(self.ratios)

    @property
    def d(self) -> int:
        return len(self.translations[0])

    @property
    def ratio_array(self) -> np.ndarray:
        return np.array([float(r) for r in self.ratios])

    @property
    def translation_array(self) -> np.ndarray:
        return np.array([[float(c) for c in t] for t in self.translations])

    @property
    def linear(self) -> np.ndarray:
        return self.ratio_array[:, None, None] * self.orthogonals

    @property
    def is_exact(self) -> bool:
        """True on the line when every ratio and translation is rational."""
        return (
            self.d == 1
            and all(isinstance(r, Rational) for r in self.ratios)
            and all(isinstance(t[0], Rational) for t in self.translations)
        )

    def index_of(self, symbol: int) -> int:
        try:
            return self.labels.index(symbol)
        except ValueError:
            raise ValidationError(f"symbol {symbol} out of range {self.labels}") from None


@dataclass(frozen=True, eq=False)
class SelfSimilarMeasureSpec:
    ifs: SimilarIFS
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.ifs.m,):
            raise ValidationError(f"expected {self.ifs.m} probabilities", field_path="task.probabilities")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("probabilities must be non-negative and sum to 1", field_path="task.probabilities")
        object.__setattr__(self, "p", p)


# ----------------------------
# Dimensions
# ----------------------------

def similarity_dimension(ratios: Sequence[float]) -> float:
    """Unique s >= 0 with sum r_i^s = 1 (not clamped to the ambient dimension)."""
    if len(ratios) == 0:
        raise ValidationError("ratios must not be empty", field_path="system.ratios")
    log_r = np.log(np.array([float(r) for r in ratios]))
    if (log_r >= 0).any():
        raise ValidationError("ratios must lie in (0,1)", field_path="system.ratios")
    moran = lambda s: float(logsumexp(s * log_r))
    upper = math.log(len(ratios)) / -log_r.max() + 1.0
    return pressure_root(moran, (0.0, upper), tol=1e-12)


def simdim_measure(spec: SelfSimilarMeasureSpec) -> float:
    """sum p log p / sum p log r; 0 for a measure on a single atom."""
    p = spec.p
    if not (p > 0).any():
        raise ValidationError("measure has no mass", field_path="task.probabilities")
    numerator = xlogy(p, p).sum()
    denominator = (p * np.log(spec.ifs.ratio_array)).sum()
    return float(numerator / denominator) + 0.0


def product_set_dimensions(lam: float) -> Tuple[float, float]:
    """
    For the {0,1,3} family times [0,1]: the dimension of the product set
    and the trivial bound min{2, log 6 / -log lam}.
    """
    rate = -math.log(lam)
    return 1.0 + math.log(2) / rate, min(2.0, math.log(6) / rate)


# ----------------------------
# Points
# ----------------------------

def natural_projection(ifs: SimilarIFS, word: Sequence[int], base_point=None) -> np.ndarray:
    """S_{i1} o S_{i2} o ... o S_{in}(base_point)."""
    if len(word) == 0:
        raise ValidationError("word must not be empty")
    x = np.zeros(ifs.d) if base_point is None else np.asarray(base_point, dtype=float).reshape(ifs.d)
    linear, translations = ifs.linear, ifs.translation_array
    for symbol in reversed(word):
        i = ifs.index_of(symbol)
        x = linear[i] @ x + translations[i]
    return x


def attractor_points(ifs: SimilarIFS, count: int, seed: int, weights=None) -> np.ndarray:
    if count < 1:
        raise ValidationError("count must be >= 1", field_path="task.count")
    return chaos_game(ifs.linear, ifs.translation_array, count, seed, weights=weights)


# ----------------------------
# Overlaps on the line
# ----------------------------

@dataclass
class SeparationLevel:
    n: int
    delta: float
    rate: float
    witness: Optional[Tuple[Word, Word]] = None


@dataclass
class SeparationReport:
    n: int
    delta_n: float
    exact_overlap: bool
    levels: List[SeparationLevel] = field(default_factory=list)

    @property
    def rate_sequence(self) -> List[float]:
        return [level.rate for level in self.levels]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(level.n, level.delta, level.rate) for level in self.levels], columns=["n", "delta", "rate"],
        )

    def to_dict(self):
        return {
            "n": self.n,
            "delta_n": self.delta_n,
            "exact_overlap": self.exact_overlap,
            "levels": [
                {"n": lv.n, "delta": lv.delta, "rate": lv.rate,
                 "witness": [list(w) for w in lv.witness] if lv.witness else None}
                for lv in self.levels
            ],
        }


def _require_line(ifs: SimilarIFS) -> None:
    if ifs.d != 1:
        raise ValidationError(f"overlap diagnostics need a system on the line, got d = {ifs.d}")


def _signed_ratios(ifs: SimilarIFS) -> List:
    return [r if O[0, 0] > 0 else -r for r, O in zip(ifs.ratios, ifs.orthogonals)]


def _exact_level(ifs: SimilarIFS, n: int) -> Tuple[float, Optional[Tuple[Word, Word]]]:
    signed = [Fraction(r) for r in _signed_ratios(ifs)]
    shifts = [Fraction(t[0]) for t in ifs.translations]
    groups: Dict[Fraction, List[Tuple[Fraction, Word]]] = {}
    for word in itertools.product(range(ifs.m), repeat=n):
        derivative, value = Fraction(1), shifts[word[-1]]
        for i in reversed(word[:-1]):
            value = shifts[i] + signed[i] * value
        for i in word:
            derivative *= signed[i]
        groups.setdefault(derivative, []).append((value, word))

    best, pair = math.inf, None
    for members in groups.values():
        members.sort()
        for (v1, w1), (v2, w2) in zip(members, members[1:]):
            if v2 - v1 < best:
                best, pair = float(v2 - v1), (w1, w2)
    return best, pair


def _float_level(ifs: SimilarIFS, n: int) -> Tuple[float, Optional[Tuple[Word, Word]]]:
    signed = np.array([float(r) for r in _signed_ratios(ifs)])
    shifts = ifs.translation_array[:, 0]
    words = all_words(ifs.m, n)
    derivatives = np.prod(signed[words], axis=1)
    values = shifts[words[:, -1]].copy()
    for j in range(n - 2, -1, -1):
        values = shifts[words[:, j]] + signed[words[:, j]] * values

    order = np.argsort(derivatives, kind="stable")
    sorted_d = derivatives[order]
    scale = np.maximum(np.abs(sorted_d[1:]), np.abs(sorted_d[:-1]))
    new_group = np.abs(np.diff(sorted_d)) > COINCIDENCE_TOL * scale
    group_ids = np.empty(words.shape[0], dtype=np.int64)
    group_ids[order] = np.concatenate(([0], np.cumsum(new_group)))

    order = np.lexsort((values, group_ids))
    same = group_ids[order][1:] == group_ids[order][:-1]
    if not same.any():
        return math.inf, None
    gaps = np.where(same, np.diff(values[order]), np.inf)
    k = int(np.argmin(gaps))
    pair = (tuple(words[order[k]]), tuple(words[order[k + 1]]))
    return float(gaps[k]), pair


def _level_delta(ifs: SimilarIFS, n: int) -> Tuple[float, Optional[Tuple[Word, Word]]]:
    check_budget(ifs.m, n)
    delta, pair = (_exact_level if ifs.is_exact else _float_level)(ifs, n)
    if pair is not None:
        labelled = sorted(tuple(ifs.labels[i] for i in w) for w in pair)
        pair = (labelled[0], labelled[1])
    return delta, pair


def _is_overlap(ifs: SimilarIFS, delta: float) -> bool:
    return delta == 0 if ifs.is_exact else delta <= COINCIDENCE_TOL


def separation_delta(ifs: SimilarIFS, n: int) -> SeparationReport:
    """
    Delta_k for k = 1..n: the smallest gap |S_w(0) - S_v(0)| between distinct
    words with equal composed derivative (+inf when no two words share one).
    The rate at level k is -(1/k) log Delta_k.
    """
    _require_line(ifs)
    check_budget(ifs.m, n)
    levels = []
    for k in range(1, n + 1):
        delta, pair = _level_delta(ifs, k)
        if _is_overlap(ifs, delta):
            delta, rate = 0.0, math.inf
        elif math.isinf(delta):
            rate = -math.inf
        else:
            rate = -math.log(delta) / k
        levels.append(SeparationLevel(k, delta, rate, pair if delta == 0 else None))
        logger.debug("Delta_%d = %.6g", k, delta)
    return SeparationReport(
        n=n,
        delta_n=levels[-1].delta,
        exact_overlap=any(level.delta == 0 for level in levels),
        levels=levels,
    )


def exact_overlap_search(ifs: SimilarIFS, n_max: int) -> Optional[Tuple[Word, Word]]:
    """First pair of distinct words (in labels) with identical composed maps, up to n_max."""
    _require_line(ifs)
    for k in range(1, n_max + 1):
        delta, pair = _level_delta(ifs, k)
        if pair is not None and _is_overlap(ifs, delta):
            logger.info("exact overlap at level %d: %s = %s", k, pair[0], pair[1])
            return pair
    return None


@dataclass
class IntervalSeparation:
    hull: Tuple[float, float]
    images: List[Tuple[float, float]]
    min_gap: float
    verdict: str  # "disjoint" | "touching" | "overlapping"


def interval_separation(ifs: SimilarIFS, max_iter: int = 10_000) -> IntervalSeparation:
    """Convex hull of the attractor and how its first-level images sit."""
    _require_line(ifs)
    signed = np.array([float(r) for r in _signed_ratios(ifs)])
    shifts = ifs.translation_array[:, 0]
    lo = hi = float(shifts[0])
    for _ in range(max_iter):
        ends = np.concatenate((signed * lo + shifts, signed * hi + shifts))
        new_lo, new_hi = float(ends.min()), float(ends.max())
        if abs(new_lo - lo) <= 1e-15 and abs(new_hi - hi) <= 1e-15:
            break
        lo, hi = new_lo, new_hi

    a, b = signed * lo + shifts, signed * hi + shifts
    images = sorted(zip(np.minimum(a, b).tolist(), np.maximum(a, b).tolist()))
    if len(images) == 1:
        return IntervalSeparation((lo, hi), images, math.inf, "disjoint")
    reach = np.maximum.accumulate([right for _, right in images])
    min_gap = float(min(images[i + 1][0] - reach[i] for i in range(len(images) - 1)))
    if min_gap > COINCIDENCE_TOL:
        verdict = "disjoint"
    elif min_gap >= -COINCIDENCE_TOL:
        verdict = "touching"
    else:
        verdict = "overlapping"
    return IntervalSeparation((lo, hi), images, min_gap, verdict)
