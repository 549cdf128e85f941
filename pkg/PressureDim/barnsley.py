"""
Barnsley skew products

F(x, y) = (gamma_i x + v_i, a_i x + lambda_i y + t_i) for x in I_i = [x_{i-1}, x_i),
the last interval closed. The base map f is piecewise affine and expanding;
the repeller of F is the graph of a function G on [0,1].

- Admissible words and their cylinders by exact affine interval propagation
- Markov / diagonality classification
- Markov pressure on type-1 Markov subsystems, Hofbauer envelopes, and the
  zero s_0 of the pressure as a dimension bracket
- Backward sampling of points on the graph of G
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import entr, logsumexp

from config import settings
from PressureDim.errors import NumericError, ValidationError
from PressureDim.numerics.perron import spectral_radius
from PressureDim.numerics.roots import clamped_root
from PressureDim.numerics.words import check_budget
from PressureDim.reports import DimensionReport
from PressureDim.selfaffine import lyapunov_dimension
from PressureDim.selfsimilar import SimilarIFS, separation_delta

logger = logging.getLogger(__name__)

DIAGONAL_TOL = 1e-12
MAX_RESAMPLE_ROUNDS = 100

Word = Tuple[int, ...]


# ----------------------------
# Systems
# ----------------------------

@dataclass(frozen=True)
class Branch:
    gamma: float
    v: float
    a: float
    lam: float
    t: float


@dataclass(frozen=True, eq=False)
class BarnsleySystem:
    partition: Tuple[float, ...]
    branches: Tuple[Branch, ...]

    def __post_init__(self):
        partition = tuple(float(x) for x in self.partition)
        branches = tuple(self.branches)
        m = len(branches)
        if m < 1 or len(partition) != m + 1:
            raise ValidationError(
                f"{m} branches need {m + 1} partition points, got {len(partition)}",
                field_path="system.partition",
            )
        if partition[0] != 0.0 or partition[-1] != 1.0:
            raise ValidationError("partition must start at 0 and end at 1", field_path="system.partition")
        if any(b <= a for a, b in zip(partition, partition[1:])):
            raise ValidationError("partition points must increase strictly", field_path="system.partition")
        object.__setattr__(self, "partition", partition)
        object.__setattr__(self, "branches", branches)

    @property
    def m(self) -> int:
        return len(self.branches)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(b, name) for b in self.branches], dtype=float)

    @property
    def image_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """J_i = f_i(I_i) as (lows, highs)."""
        gamma, v = self.column("gamma"), self.column("v")
        left = gamma * np.array(self.partition[:-1]) + v
        right = gamma * np.array(self.partition[1:]) + v
        return np.minimum(left, right), np.maximum(left, right)

    @property
    def interior_points(self) -> np.ndarray:
        return np.array(self.partition[1:-1])

    def branch_of(self, x) -> np.ndarray:
        idx = np.searchsorted(np.array(self.partition), x, side="right") - 1
        return np.clip(idx, 0, self.m - 1)

    def apply(self, x, y):
        """F(x, y)."""
        i = self.branch_of(x)
        gamma, v, a, lam, t = (self.column(c)[i] for c in ("gamma", "v", "a", "lam", "t"))
        return gamma * x + v, a * x + lam * y + t


@dataclass
class SystemDiagnostics:
    images: List[Tuple[float, float]]
    theorem_mode: bool
    markov: bool
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "images": [list(j) for j in self.images],
            "theorem_mode": self.theorem_mode,
            "markov": self.markov,
            "notes": self.notes,
        }


def validate(system: BarnsleySystem) -> SystemDiagnostics:
    tol = settings.INTERVAL_TOL
    lows, highs = system.image_bounds
    for i, branch in enumerate(system.branches):
        path = f"system.branches[{i}]"
        if abs(branch.gamma) <= 1 or abs(branch.lam) <= 1:
            raise ValidationError(f"branch {i + 1} not expanding", field_path=path)
        if lows[i] < -tol or highs[i] > 1 + tol:
            raise ValidationError(
                f"branch {i + 1} image [{lows[i]:.6g}, {highs[i]:.6g}] leaves [0,1]", field_path=path,
            )
    gamma, lam = np.abs(system.column("gamma")), np.abs(system.column("lam"))
    theorem_mode = bool(np.all(gamma > lam))
    notes = []
    if not theorem_mode:
        notes.append("some branch has |gamma| <= |lambda|; dimension theorems do not apply")
    return SystemDiagnostics(
        images=list(zip(lows.tolist(), highs.tolist())),
        theorem_mode=theorem_mode,
        markov=is_markov(system),
        notes=notes,
    )


def is_markov(system: BarnsleySystem) -> bool:
    """Every branch image closure is a union of partition interval closures."""
    points = np.array(system.partition)
    lows, highs = system.image_bounds
    ends = np.concatenate((lows, highs))
    distance = np.abs(ends[:, None] - points[None, :]).min(axis=1)
    return bool(np.all(distance <= settings.INTERVAL_TOL))


def is_full_branch(system: BarnsleySystem) -> bool:
    lows, highs = system.image_bounds
    tol = settings.INTERVAL_TOL
    return bool(np.all(np.abs(lows) <= tol) and np.all(np.abs(highs - 1) <= tol))


# ----------------------------
# Cylinders
# ----------------------------

@dataclass
class CylinderLevel:
    """All admissible words of one length, 0-based, in lexicographic order."""
    words: np.ndarray  # (N, n)
    hull: np.ndarray  # (N, 2) cylinder C[w] in [0,1]
    image: np.ndarray  # (N, 2) f^n(C[w])
    gamma: np.ndarray  # composed slope of f^n on C[w]
    shift: np.ndarray  # composed translation: f^n(x) = gamma x + shift
    lam: np.ndarray  # composed fibre contraction inverse (product of lambda)

    def __len__(self) -> int:
        return self.words.shape[0]

    @property
    def n(self) -> int:
        return self.words.shape[1]

    def labels(self) -> List[Word]:
        return [tuple(int(s) + 1 for s in row) for row in self.words]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "word": ["".join(str(s) for s in w) if len(w) < 10 else ",".join(map(str, w)) for w in self.labels()],
            "left": self.hull[:, 0],
            "right": self.hull[:, 1],
            "image_left": self.image[:, 0],
            "image_right": self.image[:, 1],
        })


def _root_level() -> CylinderLevel:
    return CylinderLevel(
        words=np.zeros((1, 0), dtype=np.int64),
        hull=np.array([[0.0, 1.0]]),
        image=np.array([[0.0, 1.0]]),
        gamma=np.ones(1),
        shift=np.zeros(1),
        lam=np.ones(1),
    )


def _next_level(system: BarnsleySystem, level: CylinderLevel) -> CylinderLevel:
    tol = settings.INTERVAL_TOL
    gamma_b, v_b, lam_b = system.column("gamma"), system.column("v"), system.column("lam")
    parts = []
    for i in range(system.m):
        lo = np.maximum(level.image[:, 0], system.partition[i])
        hi = np.minimum(level.image[:, 1], system.partition[i + 1])
        keep = hi - lo > tol
        if not keep.any():
            continue
        lo, hi = lo[keep], hi[keep]
        gamma, shift = level.gamma[keep], level.shift[keep]
        # pull the piece back to the cylinder, push it forward one step
        pre = np.sort(np.stack(((lo - shift) / gamma, (hi - shift) / gamma), axis=1), axis=1)
        post = np.sort(np.stack((gamma_b[i] * lo + v_b[i], gamma_b[i] * hi + v_b[i]), axis=1), axis=1)
        words = np.concatenate((level.words[keep], np.full((keep.sum(), 1), i)), axis=1)
        parts.append((words, pre, post, gamma_b[i] * gamma, gamma_b[i] * shift + v_b[i], lam_b[i] * level.lam[keep]))

    if not parts:
        empty = np.zeros((0, level.n + 1), dtype=np.int64)
        return CylinderLevel(empty, np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0), np.zeros(0), np.zeros(0))
    words, hull, image, gamma, shift, lam = (np.concatenate(col) for col in zip(*parts))
    order = np.lexsort(words.T[::-1])
    return CylinderLevel(words[order], hull[order], image[order], gamma[order], shift[order], lam[order])


class CylinderTree:
    """Admissible cylinders of every level up to the deepest one requested."""

    def __init__(self, system: BarnsleySystem):
        self.system = system
        self._levels = [_root_level()]

    def level(self, n: int) -> CylinderLevel:
        if n < 1:
            raise ValidationError("n must be >= 1", field_path="task.n")
        if n >= len(self._levels):
            check_budget(self.system.m, n)
        while len(self._levels) <= n:
            self._levels.append(_next_level(self.system, self._levels[-1]))
            logger.debug("level %d: %d admissible words", len(self._levels) - 1, len(self._levels[-1]))
        return self._levels[n]


def admissible_words(system: BarnsleySystem, n: int) -> CylinderLevel:
    return CylinderTree(system).level(n)


def _propagate(system: BarnsleySystem, word: Sequence[int]) -> Optional[Tuple[Tuple[float, float], Tuple[float, float]]]:
    """(cylinder hull, image) of a 1-based word, or None when it is not admissible."""
    tol = settings.INTERVAL_TOL
    lo, hi, gamma, shift = 0.0, 1.0, 1.0, 0.0
    for symbol in word:
        i = symbol - 1
        b = system.branches[i]
        lo, hi = max(lo, system.partition[i]), min(hi, system.partition[i + 1])
        if hi - lo <= tol:
            return None
        lo, hi = sorted((b.gamma * lo + b.v, b.gamma * hi + b.v))
        gamma, shift = b.gamma * gamma, b.gamma * shift + b.v
    hull = tuple(sorted(((lo - shift) / gamma, (hi - shift) / gamma)))
    return hull, (lo, hi)


def transitivity_check(system: BarnsleySystem, n: int) -> bool:
    """Strong connectivity of level-n cylinders under C -> C' when f(C) meets C'."""
    level = admissible_words(system, n)
    if len(level) == 0:
        return False
    gamma, v = system.column("gamma"), system.column("v")
    first = level.words[:, 0]
    step = np.sort(np.stack((gamma[first] * level.hull[:, 0] + v[first],
                             gamma[first] * level.hull[:, 1] + v[first]), axis=1), axis=1)
    overlap = (
        np.minimum(step[:, None, 1], level.hull[None, :, 1])
        - np.maximum(step[:, None, 0], level.hull[None, :, 0])
    )
    graph = csr_matrix(overlap > settings.INTERVAL_TOL)
    components, _ = connected_components(graph, directed=True, connection="strong")
    logger.debug("transitivity at level %d: %d strong components", n, components)
    return components == 1


# ----------------------------
# Diagonality
# ----------------------------

@dataclass
class DiagonalityClass:
    kind: str  # "Diagonal" | "EssentiallyDiagonal" | "EssentiallyNonDiagonal" | "Undetermined"
    witness: Optional[Tuple[Word, Word]] = None
    connector: Optional[Word] = None
    conjugation: Optional[float] = None  # c with a_i = c (lambda_i - gamma_i)

    def to_dict(self):
        return {
            "kind": self.kind,
            "witness": [list(w) for w in self.witness] if self.witness else None,
            "connector": list(self.connector) if self.connector is not None else None,
            "conjugation": self.conjugation,
        }


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= DIAGONAL_TOL * max(1.0, abs(x), abs(y))


def _diagonalizable_together(first: Tuple[float, float, float], second: Tuple[float, float, float]) -> bool:
    """Lower-triangular [[g, 0], [a, l]] pairs given as (g, a, l)."""
    g1, a1, l1 = first
    g2, a2, l2 = second
    for g, a, l in (first, second):
        if _close(g, l) and not _close(a, 0.0):
            return False  # Jordan block
    if (_close(g1, l1) and _close(a1, 0.0)) or (_close(g2, l2) and _close(a2, 0.0)):
        return True  # scalar
    return _close((g1 - l1) * a2, (g2 - l2) * a1)


def composed_derivative(system: BarnsleySystem, word: Sequence[int]) -> Tuple[float, float, float]:
    """(gamma_w, a_w, lambda_w) of DF_w = DF_{wn} ... DF_{w1} for a 1-based word."""
    g, a, l = 1.0, 0.0, 1.0
    for symbol in word:
        b = system.branches[symbol - 1]
        g, a, l = b.gamma * g, b.a * g + b.lam * a, b.lam * l
    return g, a, l


def classify_diagonality(system: BarnsleySystem, search_depth: int = 3) -> DiagonalityClass:
    derivatives = [(b.gamma, b.a, b.lam) for b in system.branches]
    if all(a == 0 for _, a, _ in derivatives):
        return DiagonalityClass("Diagonal")

    if all(_diagonalizable_together(d1, d2) for d1, d2 in itertools.combinations_with_replacement(derivatives, 2)):
        c = next((a / (l - g) for g, a, l in derivatives if not _close(g, l)), 0.0)
        return DiagonalityClass("EssentiallyDiagonal", conjugation=c)

    tree = CylinderTree(system)
    periodic: List[Word] = []
    for n in range(1, search_depth + 1):
        level = tree.level(n)
        inside = (level.image[:, 0] <= level.hull[:, 0] + settings.INTERVAL_TOL) & (
            level.hull[:, 1] <= level.image[:, 1] + settings.INTERVAL_TOL
        )
        periodic.extend(w for w, ok in zip(level.labels(), inside) if ok)

    connectors: List[Word] = [()]
    for n in range(1, search_depth + 1):
        connectors.extend(tree.level(n).labels())

    for omega, tau in itertools.permutations(periodic, 2):
        if _diagonalizable_together(composed_derivative(system, omega), composed_derivative(system, tau)):
            continue
        for eta in connectors:
            if _propagate(system, omega + eta + tau) is not None:
                logger.info("non-diagonal witness %s, %s joined by %s", omega, tau, eta)
                return DiagonalityClass("EssentiallyNonDiagonal", witness=(omega, tau), connector=eta)
    return DiagonalityClass("Undetermined")


# ----------------------------
# Markov subsystems and pressure
# ----------------------------

@dataclass(frozen=True, eq=False)
class MarkovSubsystem:
    n: int
    words: np.ndarray
    hull: np.ndarray
    image: np.ndarray
    log_gamma: np.ndarray  # log |gamma_w|
    log_lam: np.ndarray  # log |lambda_w|
    transition: np.ndarray

    def __post_init__(self):
        if len(self) and (_partial_overlaps(self.image, self.hull)).any():
            raise ValidationError("subsystem is not Markov of type 1")

    def __len__(self) -> int:
        return self.words.shape[0]

    def labels(self) -> List[Word]:
        return [tuple(int(s) + 1 for s in row) for row in self.words]


def _overlap(image: np.ndarray, hull: np.ndarray) -> np.ndarray:
    return (
        np.minimum(image[:, None, 1], hull[None, :, 1]) - np.maximum(image[:, None, 0], hull[None, :, 0])
    )


def _contains(image: np.ndarray, hull: np.ndarray) -> np.ndarray:
    tol = settings.INTERVAL_TOL
    return (image[:, None, 0] <= hull[None, :, 0] + tol) & (hull[None, :, 1] <= image[:, None, 1] + tol)


def _partial_overlaps(image: np.ndarray, hull: np.ndarray) -> np.ndarray:
    """[i, j]: f^n(C_i) meets the interior of C_j without covering it."""
    return (_overlap(image, hull) > settings.INTERVAL_TOL) & ~_contains(image, hull)


def _subsystem(level: CylinderLevel, keep: np.ndarray) -> MarkovSubsystem:
    image, hull = level.image[keep], level.hull[keep]
    return MarkovSubsystem(
        n=level.n,
        words=level.words[keep],
        hull=hull,
        image=image,
        log_gamma=np.log(np.abs(level.gamma[keep])),
        log_lam=np.log(np.abs(level.lam[keep])),
        transition=_contains(image, hull).astype(np.int64),
    )


def extract_markov_subsystems(system: BarnsleySystem, n: int, tree: Optional[CylinderTree] = None) -> MarkovSubsystem:
    """
    Greedy deletion to a type-1 Markov family of level-n cylinders.

    Each round drops the cylinders partially covered by the image of a
    survivor, then the cylinders whose image covers no survivor.
    """
    level = (tree or CylinderTree(system)).level(n)
    alive = np.ones(len(level), dtype=bool)
    partial = _partial_overlaps(level.image, level.hull)
    covers = _contains(level.image, level.hull)
    rounds = 0
    while True:
        rounds += 1
        before = alive.copy()
        alive &= ~(partial[alive].any(axis=0))
        alive &= (covers[:, alive]).any(axis=1)
        if (alive == before).all():
            break
    logger.debug("level %d: %d of %d cylinders survive after %d rounds", n, alive.sum(), len(level), rounds)
    return _subsystem(level, alive)


def _log_weights(log_gamma: np.ndarray, log_lam: np.ndarray, s: float) -> np.ndarray:
    """S_n phi^s on each cylinder."""
    if s <= 1:
        return -s * log_lam
    return -log_lam - (s - 1) * log_gamma


def markov_pressure(system: BarnsleySystem, subsystem: MarkovSubsystem, s: float) -> float:
    """log rho(A^(s)); -inf on an empty subsystem. Not divided by the level."""
    if not 0 <= s <= 2:
        raise ValidationError(f"s = {s} outside [0, 2]")
    if len(subsystem) == 0:
        return -math.inf
    weights = np.exp(_log_weights(subsystem.log_gamma, subsystem.log_lam, s))
    rho = spectral_radius(subsystem.transition * weights[:, None])
    return math.log(rho) if rho > 0 else -math.inf


class PressureEnvelope:
    """
    Lower and upper Hofbauer bounds for levels 1..n_max, sharing one cylinder tree.

    Markov systems collapse to the level-1 Markov pressure on both sides.
    """

    def __init__(self, system: BarnsleySystem, n_max: int):
        if n_max < 1:
            raise ValidationError("n_max must be >= 1", field_path="task.n_max")
        self.system = system
        self.markov = is_markov(system)
        self.n_max = 1 if self.markov else n_max
        self.tree = CylinderTree(system)
        self.subsystems: Dict[int, MarkovSubsystem] = {
            n: extract_markov_subsystems(system, n, self.tree) for n in range(1, self.n_max + 1)
        }
        self._levels = {n: self.tree.level(n) for n in range(1, self.n_max + 1)}

    def markov_pressure(self, s: float) -> float:
        return markov_pressure(self.system, self.subsystems[1], s)

    def lower(self, s: float) -> float:
        if self.markov:
            return self.markov_pressure(s)
        return max(markov_pressure(self.system, sub, s) / n for n, sub in self.subsystems.items())

    def upper(self, s: float) -> float:
        if self.markov:
            return self.markov_pressure(s)
        values = []
        for n, level in self._levels.items():
            log_w = _log_weights(np.log(np.abs(level.gamma)), np.log(np.abs(level.lam)), s)
            values.append(logsumexp(log_w) / n if log_w.size else -math.inf)
        return float(min(values))

    def bounds(self, s: float) -> Tuple[float, float]:
        return self.lower(s), self.upper(s)


def hofbauer_pressure(system: BarnsleySystem, s: float, n_max: int) -> Tuple[float, float]:
    return PressureEnvelope(system, n_max).bounds(s)


# ----------------------------
# Dimension
# ----------------------------

def inverse_fiber_ifs(system: BarnsleySystem, conjugation: float = 0.0) -> SimilarIFS:
    """
    The contractions y -> (y - t_i') / lambda_i on the line, where
    t_i' = t_i + c v_i removes the off-diagonal terms of an essentially
    diagonal system.
    """
    lam, t, v = system.column("lam"), system.column("t"), system.column("v")
    shifted = t + conjugation * v
    return SimilarIFS.on_line(
        ratios=(1.0 / np.abs(lam)).tolist(),
        translations=(-shifted / lam).tolist(),
        flips=(lam < 0).tolist(),
    )


def barnsley_dimension(system: BarnsleySystem, n_max: int = 8) -> DimensionReport:
    """
    Bracket for the zero s_0 of the Hofbauer pressure on [0, 2].

    The bracket runs from the zero of the lower envelope to the zero of the
    upper envelope, padded by ROOT_TOL; for Markov systems both coincide.
    """
    diagnostics = validate(system)
    if not diagnostics.theorem_mode:
        raise ValidationError("hypotheses of the dimension theorems not met", field_path="system.branches")
    level = settings.TRANSITIVITY_LEVEL
    if not transitivity_check(system, level):
        raise ValidationError(f"base map is not transitive at level {level}", field_path="system")

    envelope = PressureEnvelope(system, n_max)
    s_lower = clamped_root(envelope.lower, 0.0, 2.0, tol=settings.ROOT_TOL / 2)
    s_upper = clamped_root(envelope.upper, 0.0, 2.0, tol=settings.ROOT_TOL / 2)
    tol = settings.ROOT_TOL
    bracket = (max(0.0, s_lower - tol), min(2.0, s_upper + tol))

    diagonality = classify_diagonality(system)
    details = {
        "markov": envelope.markov,
        "diagonality": diagonality.kind,
        "witness": [list(w) for w in diagonality.witness] if diagonality.witness else None,
        "lower_root": s_lower,
        "upper_root": s_upper,
        "transitive_at_level": level,
    }
    notes = []
    if diagonality.kind in ("Diagonal", "EssentiallyDiagonal"):
        inverse = inverse_fiber_ifs(system, diagonality.conjugation or 0.0)
        depth = n_max
        if system.m > 1:
            depth = min(depth, int(math.log(settings.WORD_BUDGET) / math.log(system.m)))
        separation = separation_delta(inverse, depth)
        details["separation_rates"] = separation.rate_sequence
        details["exact_overlap"] = separation.exact_overlap
        notes.append("separation rates of the inverse fibre system are advisory only")
    if not envelope.markov:
        notes.append(
            "non-Markov base: the Hofbauer envelopes are not known to meet, the bracket may not close"
        )

    value = 0.5 * (bracket[0] + bracket[1])
    logger.info("Barnsley dimension in [%.10f, %.10f]", *bracket)
    return DimensionReport(
        kind="barnsley",
        value=value,
        bracket=bracket,
        ambient_dimension=2,
        n=envelope.n_max,
        certified_upper=bracket[1],
        details=details,
        notes=notes,
    )


# ----------------------------
# Lyapunov adapter
# ----------------------------

def skew_lyapunov_exponents(system: BarnsleySystem, weights: Sequence[float]) -> Tuple[float, float]:
    """(chi_x, chi_y) of the Bernoulli measure with branch weights q."""
    q = np.asarray(weights, dtype=float)
    if q.shape != (system.m,) or (q < 0).any() or abs(q.sum() - 1) > 1e-12:
        raise ValidationError("weights must be a probability vector, one per branch", field_path="task.probabilities")
    return (
        float(q @ np.log(np.abs(system.column("gamma")))),
        float(q @ np.log(np.abs(system.column("lam")))),
    )


def skew_lyapunov_dimension(h: float, chi_x: float, chi_y: float) -> float:
    """Dimension of an ergodic measure from positive expansion rates."""
    if chi_x <= chi_y:
        return h / chi_x
    return lyapunov_dimension(h, [-chi_y, -chi_x]).value


def _simplex_grid(m: int, points: int) -> np.ndarray:
    if m == 1:
        return np.ones((1, 1))
    if m == 2:
        q = np.linspace(0.0, 1.0, points)
        return np.stack((q, 1.0 - q), axis=1)
    steps = points - 1
    rows = [c for c in itertools.product(range(steps + 1), repeat=m - 1) if sum(c) <= steps]
    grid = np.array([list(c) + [steps - sum(c)] for c in rows], dtype=float)
    return grid / steps


def bernoulli_dimension_sup(system: BarnsleySystem, grid_points: int = 200) -> Tuple[float, np.ndarray]:
    """Largest Lyapunov dimension over Bernoulli branch weights on a simplex grid."""
    if not is_full_branch(system):
        raise ValidationError("Bernoulli scan needs a full-branch system")
    log_gamma = np.log(np.abs(system.column("gamma")))
    log_lam = np.log(np.abs(system.column("lam")))
    best, best_q = -math.inf, None
    for q in _simplex_grid(system.m, grid_points):
        h = float(entr(q).sum())
        value = skew_lyapunov_dimension(h, float(q @ log_gamma), float(q @ log_lam))
        if value > best:
            best, best_q = value, q
    return best, best_q


# ----------------------------
# Graph of G
# ----------------------------

@dataclass
class RepellerCloud:
    points: np.ndarray  # (count, 2)
    depth: int
    tail_bound: float
    resampled: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.points[:, 0], "y": self.points[:, 1]})


def tail_constant(system: BarnsleySystem) -> float:
    a, t = np.abs(system.column("a")), np.abs(system.column("t"))
    lam_min = float(np.abs(system.column("lam")).min())
    return (2 * a.max() + t.max()) / (lam_min - 1)


def tail_bound(system: BarnsleySystem, depth: int) -> float:
    lam_min = float(np.abs(system.column("lam")).min())
    return tail_constant(system) * lam_min ** -depth


def graph_series(system: BarnsleySystem, orbit, branches) -> np.ndarray:
    """
    -sum_k (a_{i_k} x_k + t_{i_k}) prod_{j<=k} 1/lambda_{i_j} along given
    orbits; `orbit` and 0-based `branches` have the time index first.
    """
    orbit = np.asarray(orbit, dtype=float)
    branches = np.asarray(branches, dtype=np.int64)
    a, lam, t = system.column("a"), system.column("lam"), system.column("t")
    total = np.zeros(orbit.shape[1:])
    for k in range(orbit.shape[0] - 1, -1, -1):
        i = branches[k]
        total = (total - a[i] * orbit[k] - t[i]) / lam[i]
    return total


def forward_orbit(system: BarnsleySystem, x, depth: int) -> Tuple[np.ndarray, np.ndarray]:
    """Orbit x, f(x), ..., and branch indices; refuses orbits touching a partition point."""
    x = np.asarray(x, dtype=float)
    interior = system.interior_points
    gamma, v = system.column("gamma"), system.column("v")
    orbit = np.empty((depth,) + x.shape)
    branches = np.empty((depth,) + x.shape, dtype=np.int64)
    for k in range(depth):
        if interior.size and np.min(np.abs(np.subtract.outer(x, interior))) <= settings.ORBIT_TOUCH_RADIUS:
            raise NumericError(f"orbit hits a partition point at step {k}")
        i = system.branch_of(x)
        orbit[k], branches[k] = x, i
        x = gamma[i] * x + v[i]
    return orbit, branches


def graph_value(system: BarnsleySystem, x, depth: int) -> np.ndarray:
    orbit, branches = forward_orbit(system, x, depth)
    return graph_series(system, orbit, branches)


def repeller_points(system: BarnsleySystem, count: int, depth: int, seed: int) -> RepellerCloud:
    """
    Points (x, G(x)) sampled by pulling a uniform point back `depth` times
    through randomly chosen admissible inverse branches. G is accumulated
    along the way, so the truncation error is at most tail_bound(depth).
    Pulled-back orbits within SINGULARITY_RADIUS of a partition point are resampled.
    """
    validate(system)
    if count < 1 or depth < 1:
        raise ValidationError("count and depth must be >= 1", field_path="task")
    bound = tail_bound(system, depth)
    lam_min = float(np.abs(system.column("lam")).min())
    if lam_min ** -depth >= 1e-9:
        logger.warning("depth %d leaves lambda_min^-depth = %.3g >= 1e-9", depth, lam_min ** -depth)

    gamma, v, a, lam, t = (system.column(c) for c in ("gamma", "v", "a", "lam", "t"))
    lows, highs = system.image_bounds
    interior = system.interior_points
    rng = np.random.default_rng(seed)

    points = np.empty((count, 2))
    pending = np.arange(count)
    resampled = 0
    for _ in range(MAX_RESAMPLE_ROUNDS):
        if pending.size == 0:
            break
        k = pending.size
        x = rng.random(k)
        g = np.zeros(k)
        ok = np.ones(k, dtype=bool)
        for _ in range(depth):
            allowed = (lows[None, :] <= x[:, None]) & (x[:, None] <= highs[None, :])
            choices = allowed.sum(axis=1)
            ok &= choices > 0
            pick = np.floor(rng.random(k) * np.maximum(choices, 1))
            i = np.argmax(np.cumsum(allowed, axis=1) > pick[:, None], axis=1)
            x = (x - v[i]) / gamma[i]
            g = (g - a[i] * x - t[i]) / lam[i]
            if interior.size:
                ok &= np.abs(x[:, None] - interior[None, :]).min(axis=1) > settings.SINGULARITY_RADIUS
        points[pending[ok], 0] = x[ok]
        points[pending[ok], 1] = g[ok]
        resampled += int((~ok).sum())
        pending = pending[~ok]
    if pending.size:
        raise NumericError(f"{pending.size} samples still hit the singular set after {MAX_RESAMPLE_ROUNDS} rounds")

    if resampled:
        logger.warning("resampled %d orbits near partition points", resampled)
    return RepellerCloud(points=points, depth=depth, tail_bound=bound, resampled=resampled)
