import math

import numpy as np
import pytest

from PressureDim.catalog import six_rectangle_carpet
from PressureDim.errors import ValidationError
from PressureDim.selfaffine import (
    AffineIFS,
    affine_attractor_points,
    bhr_conditions,
    lyapunov_dimension,
    lyapunov_exponents,
    measure_lyapunov_dimension,
)
from PressureDim.symbolic_core import ErgodicMeasureSpec

DIAGONAL_PAIR = [np.diag([1 / 2, 1 / 3]), np.diag([1 / 4, 1 / 5])]
UNIFORM = ErgodicMeasureSpec.bernoulli([0.5, 0.5])


# ----------------------------
# Systems
# ----------------------------

def test_affine_ifs_rejects_expanding_map():
    with pytest.raises(ValidationError, match="not contracting"):
        AffineIFS([np.diag([1.2, 0.5])], [[0.0, 0.0]])


def test_affine_ifs_rejects_singular_map():
    with pytest.raises(ValidationError, match="rank-deficient") as info:
        AffineIFS([np.diag([0.5, 0.5]), np.diag([0.5, 0.0])], [[0, 0], [0.5, 0]])
    assert info.value.field_path == "system.matrices[1]"


@pytest.mark.parametrize("matrices, translations, field_path", [
    ([np.diag([0.5, 0.5]), [[0.5]]], [[0, 0], [0.5, 0]], "system.matrices"),
    ([np.diag([0.5, 0.5])], [[0, 0, 0]], "system.translations"),
])
def test_affine_ifs_rejects_mismatched_shapes(matrices, translations, field_path):
    with pytest.raises(ValidationError) as info:
        AffineIFS(matrices, translations)
    assert info.value.field_path == field_path


def test_carpet_points_stay_in_the_square():
    points = affine_attractor_points(six_rectangle_carpet(), 5000, seed=2)
    assert points.shape == (5000, 2)
    assert points.min() >= 0.0 and points.max() <= 1.0


# ----------------------------
# Lyapunov exponents
# ----------------------------

def test_exact_exponents_of_diagonal_pair():
    spectrum = lyapunov_exponents(DIAGONAL_PAIR, UNIFORM, n=1000, trials=50, seed=0)
    assert spectrum.method == "exact"
    np.testing.assert_allclose(spectrum.exponents, [-1.039721, -1.354025], atol=1e-6)
    assert spectrum.entropy == pytest.approx(math.log(2))


def test_sampled_exponents_agree_with_closed_form():
    exact = lyapunov_exponents(DIAGONAL_PAIR, UNIFORM, n=1000, trials=50, seed=0)
    sampled = lyapunov_exponents(DIAGONAL_PAIR, UNIFORM, n=10_000, trials=200, seed=0, method="sampled")
    assert sampled.method == "sampled"
    assert (sampled.stderr > 0).all()
    assert (np.abs(sampled.exponents - exact.exponents) <= 3 * sampled.stderr).all()


def test_sampled_exponents_are_seeded():
    matrices = [np.array([[0.5, 0.1], [0.2, 0.3]]), np.array([[0.4, -0.1], [0.0, 0.2]])]
    first = lyapunov_exponents(matrices, UNIFORM, n=200, trials=10, seed=5)
    second = lyapunov_exponents(matrices, UNIFORM, n=200, trials=10, seed=5)
    assert first.method == "sampled"
    np.testing.assert_array_equal(first.exponents, second.exponents)
    assert first.exponents[0] >= first.exponents[1]


def test_single_matrix_uses_eigenvalue_moduli():
    spectrum = lyapunov_exponents([np.array([[0.5, 0.2], [0.0, 0.25]])], ErgodicMeasureSpec.bernoulli([1.0]),
                                  n=10, trials=1, seed=0)
    np.testing.assert_allclose(spectrum.exponents, np.log([0.5, 0.25]))
    assert spectrum.entropy == 0.0


def test_exact_method_needs_a_closed_form():
    matrices = [np.array([[0.5, 0.1], [0.2, 0.3]]), np.array([[0.4, -0.1], [0.0, 0.2]])]
    with pytest.raises(ValidationError, match="no closed form"):
        lyapunov_exponents(matrices, UNIFORM, n=10, trials=2, seed=0, method="exact")


def test_measure_alphabet_must_match():
    with pytest.raises(ValidationError, match="alphabet mismatch"):
        lyapunov_exponents(DIAGONAL_PAIR, ErgodicMeasureSpec.bernoulli([0.2, 0.3, 0.5]), n=10, trials=2, seed=0)


# ----------------------------
# Lyapunov dimension
# ----------------------------

@pytest.mark.parametrize("h, exponents, value, k", [
    (math.log(6), [-math.log(3), -math.log(5)], 1 + math.log(2) / math.log(5), 1),
    (0.5, [-1.0, -2.0], 0.5, 0),
    (3.0, [-1.0, -1.0], 3.0, 2),
])
def test_lyapunov_dimension(h, exponents, value, k):
    result = lyapunov_dimension(h, exponents)
    assert result.value == pytest.approx(value, abs=1e-12)
    assert result.k == k
    assert result.clamped == pytest.approx(min(len(exponents), value))


@pytest.mark.parametrize("boundary, value", [(1.0, 1.0), (3.0, 2.0)])
def test_lyapunov_dimension_is_continuous_across_cases(boundary, value):
    chi = [-1.0, -2.0]
    for h in (boundary - 1e-13, boundary, boundary + 1e-13):
        assert lyapunov_dimension(h, chi).value == pytest.approx(value, abs=1e-12)
    assert lyapunov_dimension(boundary - 1e-13, chi).k + 1 == lyapunov_dimension(boundary + 1e-13, chi).k


@pytest.mark.parametrize("h, exponents", [
    (1.0, [-2.0, -1.0]),
    (1.0, [0.0, -1.0]),
    (-0.1, [-1.0, -2.0]),
    (1.0, []),
])
def test_lyapunov_dimension_rejects_bad_input(h, exponents):
    with pytest.raises(ValidationError):
        lyapunov_dimension(h, exponents)


def test_six_rectangle_lyapunov_dimension():
    ifs = six_rectangle_carpet()
    spectrum, dimension = measure_lyapunov_dimension(ifs, ErgodicMeasureSpec.bernoulli(np.full(6, 1 / 6)),
                                                     n=100, trials=2, seed=0)
    assert spectrum.method == "exact"
    assert dimension.value == pytest.approx(1 + math.log(2) / math.log(5), abs=1e-12)


# ----------------------------
# Planar checks
# ----------------------------

def test_lower_triangular_pair_has_invariant_line():
    ifs = AffineIFS([[[0.3, 0.0], [0.1, 0.5]], [[0.2, 0.0], [-0.1, 0.4]]], [[0, 0], [0.5, 0.5]])
    report = bhr_conditions(ifs)
    assert report.lower_triangular
    assert report.diagonal_dominance
    assert report.triangular_theorem_applies
    assert report.irreducibility == "obstruction found"
    assert abs(report.invariant_line[0]) < 1e-12
    assert abs(report.invariant_line[1]) == pytest.approx(1.0)


def test_diagonal_pair_fixes_an_axis():
    report = bhr_conditions(AffineIFS(DIAGONAL_PAIR, [[0, 0], [0.5, 0.5]]))
    assert report.lower_triangular
    assert not report.diagonal_dominance
    assert report.irreducibility == "obstruction found"
    assert sorted(np.abs(report.invariant_line)) == pytest.approx([0.0, 1.0])


def test_rotating_pair_has_no_obstruction():
    ifs = AffineIFS([[[0.5, 0.2], [-0.1, 0.4]], [[0.3, -0.2], [0.25, 0.35]]], [[0, 0], [0.5, 0.5]])
    report = bhr_conditions(ifs)
    assert not report.lower_triangular
    assert report.invariant_line is None
    assert report.irreducibility == "no obstruction found"
    assert report.notes


def test_planar_checks_need_the_plane():
    ifs = AffineIFS([[[0.5]], [[0.5]]], [[0.0], [0.5]])
    with pytest.raises(ValidationError, match="d = 2"):
        bhr_conditions(ifs)
