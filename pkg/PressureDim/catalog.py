"""
Named example systems

Builders for the systems the command line and the tests refer to by name.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np

from PressureDim.barnsley import BarnsleySystem, Branch
from PressureDim.errors import ValidationError
from PressureDim.selfaffine import AffineIFS
from PressureDim.selfsimilar import SimilarIFS

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2

Number = Union[float, Fraction]


# ----------------------------
# Barnsley skew products
# ----------------------------

def _pairs(value, m: int) -> Tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * m
    values = tuple(float(v) for v in value)
    if len(values) != m:
        raise ValidationError(f"expected {m} values, got {len(values)}")
    return values


def full_branch_system(m: int, gamma, lam, a=0.0, t=0.0) -> BarnsleySystem:
    """m equal intervals, each mapped increasingly onto [0,1]."""
    if m < 1:
        raise ValidationError("m must be >= 1")
    gammas = _pairs(gamma, m)
    partition = tuple(np.linspace(0.0, 1.0, m + 1))
    lams, a_s, t_s = _pairs(lam, m), _pairs(a, m), _pairs(t, m)
    branches = tuple(
        Branch(gamma=g, v=-g * partition[i], a=a_s[i], lam=lams[i], t=t_s[i])
        for i, g in enumerate(gammas)
    )
    return BarnsleySystem(partition, branches)


def doubling_system(lam=math.sqrt(2), a=0.0, t=0.0) -> BarnsleySystem:
    return full_branch_system(2, 2.0, lam, a, t)


def golden_mean_system(lam=1.2, a=0.0, t=0.0) -> BarnsleySystem:
    """
    Base x -> phi x on [0, 1/phi) and x -> phi x - 1 on [1/phi, 1]; the
    second branch lands on the first interval only.
    """
    lams, a_s, t_s = _pairs(lam, 2), _pairs(a, 2), _pairs(t, 2)
    partition = (0.0, 1 / GOLDEN_RATIO, 1.0)
    branches = (
        Branch(GOLDEN_RATIO, 0.0, a_s[0], lams[0], t_s[0]),
        Branch(GOLDEN_RATIO, -1.0, a_s[1], lams[1], t_s[1]),
    )
    return BarnsleySystem(partition, branches)


def non_markov_system(lam=1.2, a=0.0, t=0.0) -> BarnsleySystem:
    """f(I_1) = [0, 0.7) ends inside I_2."""
    lams, a_s, t_s = _pairs(lam, 2), _pairs(a, 2), _pairs(t, 2)
    branches = (
        Branch(1.4, 0.0, a_s[0], lams[0], t_s[0]),
        Branch(2.0, -1.0, a_s[1], lams[1], t_s[1]),
    )
    return BarnsleySystem((0.0, 0.5, 1.0), branches)


def transitive_non_markov_system(lam=1.2, a=0.0, t=0.0) -> BarnsleySystem:
    """
    f(I_1) = [0, 1] and f(I_2) = [0, 0.7]. Unlike non_markov_system, where
    [0, 0.7] is invariant, every orbit returns to I_1.
    """
    lams, a_s, t_s = _pairs(lam, 2), _pairs(a, 2), _pairs(t, 2)
    branches = (
        Branch(2.0, 0.0, a_s[0], lams[0], t_s[0]),
        Branch(1.4, -0.7, a_s[1], lams[1], t_s[1]),
    )
    return BarnsleySystem((0.0, 0.5, 1.0), branches)


def takagi_system(lam: float, scale: float = 1.0) -> BarnsleySystem:
    """
    Repeller = graph of scale * sum_n lam^-n dist(2^n x, Z), from
    T(2x mod 1) = lam T(x) - lam dist(x, Z).
    """
    return full_branch_system(
        2, 2.0, lam,
        a=(-lam * scale, lam * scale),
        t=(0.0, -lam * scale),
    )


def fractal_interpolation_system(points: Sequence[Sequence[float]], scalings: Sequence[float]) -> BarnsleySystem:
    """
    Inverse of the fractal interpolation IFS through (x_0, y_0), ..., (x_N, y_N)
    with 0 = x_0 < ... < x_N = 1 and vertical scalings d_i, |d_i| < 1.
    """
    data = np.asarray(points, dtype=float)
    d = np.asarray(scalings, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise ValidationError("points must be at least two (x, y) pairs", field_path="system.points")
    x, y = data[:, 0], data[:, 1]
    if d.shape != (data.shape[0] - 1,):
        raise ValidationError("one scaling per interval", field_path="system.scalings")
    if (np.abs(d) >= 1).any() or (d == 0).any():
        raise ValidationError("scalings must satisfy 0 < |d_i| < 1", field_path="system.scalings")

    # w_i(x, y) = (p_i x + e_i, c_i x + d_i y + f_i) maps the ends onto the data
    p = np.diff(x)
    e = x[:-1]
    c = np.diff(y) - d * (y[-1] - y[0])
    f = y[:-1] - d * y[0]

    branches = []
    for i in range(d.size):
        gamma, v = 1 / p[i], -e[i] / p[i]
        branches.append(Branch(
            gamma=gamma,
            v=v,
            a=-c[i] * gamma / d[i],
            lam=1 / d[i],
            t=-(c[i] * v + f[i]) / d[i],
        ))
    return BarnsleySystem(tuple(x), tuple(branches))


BARNSLEY_CATALOG: Dict[str, Callable[..., BarnsleySystem]] = {
    "doubling": doubling_system,
    "golden_mean": golden_mean_system,
    "full_branch": full_branch_system,
    "non_markov": non_markov_system,
    "non_markov_transitive": transitive_non_markov_system,
    "takagi": takagi_system,
    "fractal_interpolation": fractal_interpolation_system,
}


# ----------------------------
# Self-similar and self-affine systems
# ----------------------------

def sierpinski_gasket() -> SimilarIFS:
    half = Fraction(1, 2)
    return SimilarIFS((half,) * 3, ((0, 0), (half, 0), (0, half)))


def four_corner() -> SimilarIFS:
    quarter = Fraction(1, 4)
    three = Fraction(3, 4)
    return SimilarIFS((quarter,) * 4, ((0, 0), (three, 0), (three, three), (0, three)))


def middle_third_cantor() -> SimilarIFS:
    third = Fraction(1, 3)
    return SimilarIFS.on_line((third, third), (0, 2 * third))


def zero_one_three(lam: Number) -> SimilarIFS:
    """{lam x, lam x + 1, lam x + 3}, words labelled by their translations."""
    return SimilarIFS.on_line((lam, lam, lam), (0, 1, 3), labels=(0, 1, 3))


def carpet_ifs(columns: int, rows: int, cells: Sequence[Tuple[int, int]]) -> AffineIFS:
    """Maps onto the chosen (column, row) cells of a columns x rows grid of [0,1]^2."""
    if columns < 2 or rows < 2:
        raise ValidationError("a carpet grid needs at least 2 columns and 2 rows")
    if not cells or len(set(cells)) != len(cells):
        raise ValidationError("cells must be distinct and non-empty", field_path="system.cells")
    for col, row in cells:
        if not (0 <= col < columns and 0 <= row < rows):
            raise ValidationError(f"cell ({col}, {row}) outside the grid", field_path="system.cells")
    linear = np.diag([1 / columns, 1 / rows])
    return AffineIFS(
        matrices=np.tile(linear, (len(cells), 1, 1)),
        translations=np.array([(col / columns, row / rows) for col, row in cells]),
    )


def six_rectangle_carpet() -> AffineIFS:
    """Six copies of diag(1/3, 1/5), two per column."""
    return carpet_ifs(3, 5, [(0, 0), (0, 2), (1, 1), (1, 4), (2, 0), (2, 3)])


SIMILAR_CATALOG: Dict[str, Callable[..., SimilarIFS]] = {
    "sierpinski": sierpinski_gasket,
    "four_corner": four_corner,
    "cantor": middle_third_cantor,
    "zero_one_three": zero_one_three,
}

AFFINE_CATALOG: Dict[str, Callable[..., AffineIFS]] = {
    "carpet": carpet_ifs,
    "six_rectangle": six_rectangle_carpet,
}
