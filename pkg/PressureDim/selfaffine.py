"""
Self-affine systems and matrix cocycles

Lyapunov exponents of random matrix products driven by a Bernoulli or Markov
measure, the Lyapunov dimension, and the planar applicability checks for the
triangular and irreducible dimension theorems.

Exponents are stored as negatives for contractions. The skew-product
convention (positive expansion rates) lives in barnsley and calls
lyapunov_dimension with negated, reordered rates.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import settings
from PressureDim.errors import ValidationError
from PressureDim.numerics.chaos import chaos_game
from PressureDim.symbolic_core import ErgodicMeasureSpec, entropy

logger = logging.getLogger(__name__)

INVARIANT_LINE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AffineIFS:
    """Maps x -> A_i x + t_i with non-singular A_i of operator norm < 1."""
    matrices: np.ndarray
    translations: np.ndarray

    def __post_init__(self):
        try:
            matrices = np.asarray(self.matrices, dtype=float)
        except ValueError:
            raise ValidationError("matrices must share one square shape", field_path="system.matrices") from None
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2] or matrices.shape[0] < 1:
            raise ValidationError("matrices must be a non-empty list of square arrays", field_path="system.matrices")
        m, d, _ = matrices.shape
        try:
            translations = np.asarray(self.translations, dtype=float).reshape(m, d)
        except ValueError:
            raise ValidationError(f"expected {m} translations in R^{d}", field_path="system.translations") from None
        norms = np.linalg.svd(matrices, compute_uv=False)
        for i in range(m):
            if norms[i, 0] >= 1:
                raise ValidationError(f"map {i + 1} is not contracting (norm {norms[i, 0]:.6g})",
                                      field_path=f"system.matrices[{i}]")
            if norms[i, -1] <= 0 or np.linalg.matrix_rank(matrices[i]) < d:
                raise ValidationError("rank-deficient", field_path=f"system.matrices[{i}]")
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(self, "translations", translations)

    @property
    def m(self) -> int:
        return self.matrices.shape[0]

    @property
    def d(self) -> int:
        return self.matrices.shape[1]


def affine_attractor_points(ifs: AffineIFS, count: int, seed: int, weights=None) -> np.ndarray:
    if count < 1:
        raise ValidationError("count must be >= 1", field_path="task.count")
    return chaos_game(ifs.matrices, ifs.translations, count, seed, weights=weights)


# ----------------------------
# Lyapunov exponents
# ----------------------------

@dataclass
class LyapunovSpectrum:
    exponents: np.ndarray  # chi_1 >= ... >= chi_d
    entropy: float
    stderr: np.ndarray
    method: str  # "exact" | "sampled"
    n: int = 0
    trials: int = 0

    @property
    def volume_rate(self) -> float:
        return float(self.exponents.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "k": np.arange(1, self.exponents.size + 1),
            "chi": self.exponents,
            "stderr": self.stderr,
        })

    def to_dict(self):
        return {
            "exponents": self.exponents.tolist(),
            "stderr": self.stderr.tolist(),
            "entropy": self.entropy,
            "method": self.method,
            "n": self.n,
            "trials": self.trials,
        }


def _is_diagonal(matrices: np.ndarray) -> bool:
    d = matrices.shape[1]
    return bool(np.all(matrices[:, ~np.eye(d, dtype=bool)] == 0))


def lyapunov_exponents(
    matrices: Sequence,
    measure: ErgodicMeasureSpec,
    n: int,
    trials: int,
    seed: int,
    method: str = "auto",
) -> LyapunovSpectrum:
    """
    Exponents of A_{w1} A_{w2} ... A_{wn} for words sampled from `measure`.

    Diagonal families and single matrices have closed forms; otherwise each
    trial multiplies with a QR re-orthonormalisation every
    REORTHONORMALIZE_EVERY steps and the trial means are reported with
    standard errors.
    """
    stack = np.asarray(matrices, dtype=float)
    if stack.ndim == 2:
        stack = stack[None]
    m, d, _ = stack.shape
    if measure.alphabet_size != m:
        raise ValidationError(
            f"measure alphabet mismatch: {measure.alphabet_size} symbols for {m} matrices",
            field_path="task.probabilities",
        )
    if n < 1 or trials < 1:
        raise ValidationError("n and trials must be >= 1", field_path="task")
    if method not in ("auto", "exact", "sampled"):
        raise ValidationError(f"unknown method {method!r}")
    h = entropy(measure)

    if method != "sampled" and m == 1:
        moduli = np.sort(np.abs(np.linalg.eigvals(stack[0])))[::-1]
        return LyapunovSpectrum(np.log(moduli), h, np.zeros(d), "exact", n, trials)
    if method != "sampled" and _is_diagonal(stack):
        diagonals = np.log(np.abs(np.einsum("kii->ki", stack)))
        chi = np.sort(measure.p @ diagonals)[::-1]
        return LyapunovSpectrum(chi, h, np.zeros(d), "exact", n, trials)
    if method == "exact":
        raise ValidationError("no closed form: matrices are not diagonal")

    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]
    words = measure.sample_words(np.stack([rng.random(n) for rng in streams]))

    # singular values of A_w1...A_wn are those of A_wn^T ... A_w1^T
    transposed = np.transpose(stack, (0, 2, 1))
    Q = np.tile(np.eye(d), (trials, 1, 1))
    logs = np.zeros((trials, d))
    period = settings.REORTHONORMALIZE_EVERY
    for k in range(n):
        Q = transposed[words[:, k]] @ Q
        if (k + 1) % period == 0 or k == n - 1:
            Q, R = np.linalg.qr(Q)
            logs += np.log(np.abs(np.diagonal(R, axis1=1, axis2=2)))

    per_trial = np.sort(logs / n, axis=1)[:, ::-1]
    chi = per_trial.mean(axis=0)
    stderr = per_trial.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(d)
    logger.info("Lyapunov exponents %s (+- %s) from %d trials of length %d", chi, stderr, trials, n)
    return LyapunovSpectrum(chi, h, stderr, "sampled", n, trials)


# ----------------------------
# Lyapunov dimension
# ----------------------------

@dataclass
class LyapunovDimension:
    value: float
    clamped: float
    k: int


def lyapunov_dimension(h: float, exponents: Sequence[float]) -> LyapunovDimension:
    """
    k + (h + chi_1 + ... + chi_k) / -chi_{k+1}, k the largest index with
    h + chi_1 + ... + chi_k > 0; d h / -sum(chi) once h beats every contraction.
    """
    chi = np.asarray(exponents, dtype=float)
    d = chi.size
    if h < 0:
        raise ValidationError("entropy must be non-negative")
    if d == 0 or (chi >= 0).any() or (np.diff(chi) > 0).any():
        raise ValidationError("exponents must be negative and sorted in decreasing order")

    partial = h + np.cumsum(chi)
    positive = np.nonzero(partial > 0)[0]
    k = int(positive[-1]) + 1 if positive.size else 0
    if k == d:
        value = d * h / -chi.sum()
    elif k == 0:
        value = h / -chi[0]
    else:
        value = k + partial[k - 1] / -chi[k]
    return LyapunovDimension(value=float(value), clamped=float(min(d, value)), k=k)


def measure_lyapunov_dimension(
    ifs: AffineIFS, measure: ErgodicMeasureSpec, n: int, trials: int, seed: int,
) -> Tuple[LyapunovSpectrum, LyapunovDimension]:
    spectrum = lyapunov_exponents(ifs.matrices, measure, n, trials, seed)
    return spectrum, lyapunov_dimension(spectrum.entropy, spectrum.exponents)


# ----------------------------
# Planar applicability checks
# ----------------------------

@dataclass
class IrreducibilityReport:
    lower_triangular: bool
    diagonal_dominance: bool  # a_i < c_i for A_i = [[a_i, 0], [b_i, c_i]]
    triangular_theorem_applies: bool
    invariant_line: Optional[List[float]] = None
    irreducibility: str = "no obstruction found"
    separation: str = "not checked"
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "lower_triangular": self.lower_triangular,
            "diagonal_dominance": self.diagonal_dominance,
            "triangular_theorem_applies": self.triangular_theorem_applies,
            "invariant_line": self.invariant_line,
            "irreducibility": self.irreducibility,
            "separation": self.separation,
            "notes": self.notes,
        }


def _real_eigenvectors(matrix: np.ndarray) -> List[np.ndarray]:
    values, vectors = np.linalg.eig(matrix)
    found = []
    for value, vector in zip(values, vectors.T):
        if abs(value.imag) <= INVARIANT_LINE_TOL:
            v = np.real(vector)
            found.append(v / np.linalg.norm(v))
    return found


def _preserves(matrix: np.ndarray, v: np.ndarray) -> bool:
    image = matrix @ v
    cross = image[0] * v[1] - image[1] * v[0]
    return abs(cross) <= INVARIANT_LINE_TOL * max(np.linalg.norm(image), 1.0)


def bhr_conditions(ifs: AffineIFS) -> IrreducibilityReport:
    """
    Exact check of the lower-triangular hypotheses (a_i < c_i) and a search
    for a line invariant under every A_i and every product A_i A_j. A line
    found is an obstruction to total irreducibility; none found proves nothing.
    """
    if ifs.d != 2:
        raise ValidationError(f"planar checks need d = 2, got d = {ifs.d}")
    A = ifs.matrices
    lower = bool(np.all(A[:, 0, 1] == 0))
    dominance = bool(lower and np.all(A[:, 0, 0] < A[:, 1, 1]))

    family = list(A) + [a @ b for a, b in itertools.product(A, repeat=2)]
    candidates = [v for matrix in family for v in _real_eigenvectors(matrix)]
    # scalar families fix every line
    if all(np.allclose(matrix, matrix[0, 0] * np.eye(2)) for matrix in family):
        candidates.append(np.array([1.0, 0.0]))

    line = None
    for v in candidates:
        if all(_preserves(matrix, v) for matrix in family):
            line = v
            break

    report = IrreducibilityReport(
        lower_triangular=lower,
        diagonal_dominance=dominance,
        triangular_theorem_applies=dominance,
        invariant_line=None if line is None else [float(c) for c in line],
        irreducibility="obstruction found" if line is not None else "no obstruction found",
    )
    if line is None:
        report.notes.append("absence of a common invariant line up to depth 2 is not a proof of irreducibility")
    return report
