import math
from fractions import Fraction

import numpy as np
import pytest

from PressureDim.catalog import four_corner, middle_third_cantor, sierpinski_gasket, zero_one_three
from PressureDim.errors import BudgetExceededError, ValidationError
from PressureDim.estimators import box_count
from PressureDim.selfsimilar import (
    SelfSimilarMeasureSpec,
    SimilarIFS,
    attractor_points,
    exact_overlap_search,
    interval_separation,
    natural_projection,
    product_set_dimensions,
    separation_delta,
    similarity_dimension,
    simdim_measure,
)


@pytest.mark.parametrize("ratios, expected", [
    ([0.5] * 3, math.log(3) / math.log(2)),
    ([0.25] * 4, 1.0),
    ([Fraction(1, 3)] * 2, math.log(2) / math.log(3)),
    ([0.5], 0.0),
])
def test_similarity_dimension_closed_forms(ratios, expected):
    assert similarity_dimension(ratios) == pytest.approx(expected, abs=1e-10)


def test_similarity_dimension_rejects_bad_ratios():
    with pytest.raises(ValidationError):
        similarity_dimension([0.5, 1.0])
    with pytest.raises(ValidationError):
        SimilarIFS((1.5,), ((0.0,),))


def test_natural_projection_four_corner():
    np.testing.assert_allclose(natural_projection(four_corner(), (2,), (0, 0)), [0.75, 0.0])
    np.testing.assert_allclose(natural_projection(four_corner(), (3, 1), (0, 0)), [0.75, 0.75])


def test_natural_projection_unknown_symbol():
    with pytest.raises(ValidationError):
        natural_projection(four_corner(), (5,))


def test_simdim_of_uniform_measure_equals_similarity_dimension():
    ifs = sierpinski_gasket()
    spec = SelfSimilarMeasureSpec(ifs, np.full(3, 1 / 3))
    assert simdim_measure(spec) == pytest.approx(math.log(3) / math.log(2), abs=1e-12)


def test_simdim_of_atom_is_zero():
    spec = SelfSimilarMeasureSpec(sierpinski_gasket(), [1.0, 0.0, 0.0])
    assert simdim_measure(spec) == 0.0


def test_simdim_never_exceeds_similarity_dimension():
    ifs = middle_third_cantor()
    for q in np.linspace(0.05, 0.95, 19):
        assert simdim_measure(SelfSimilarMeasureSpec(ifs, [q, 1 - q])) <= similarity_dimension(ifs.ratios) + 1e-9


def test_exact_overlap_at_one_third():
    ifs = zero_one_three(Fraction(1, 3))
    report = separation_delta(ifs, 2)
    assert report.delta_n == 0.0
    assert report.exact_overlap
    assert report.levels[-1].witness == ((0, 3), (1, 0))
    assert report.levels[-1].rate == math.inf
    assert exact_overlap_search(ifs, 3) == ((0, 3), (1, 0))


def test_delta_two_at_point_three_five():
    report = separation_delta(zero_one_three(0.35), 2)
    assert report.levels[0].delta == pytest.approx(1.0)
    assert report.delta_n == pytest.approx(0.05, abs=1e-12)
    assert report.rate_sequence[-1] == pytest.approx(-math.log(0.05) / 2)
    assert not report.exact_overlap
    assert list(report.to_frame().columns) == ["n", "delta", "rate"]


def test_no_shared_derivatives_gives_infinite_delta():
    ifs = SimilarIFS.on_line((0.2, 0.3), (0.0, 0.5))
    report = separation_delta(ifs, 1)
    assert report.delta_n == math.inf
    assert report.levels[0].rate == -math.inf


def test_separation_needs_the_line():
    with pytest.raises(ValidationError):
        separation_delta(sierpinski_gasket(), 2)


def test_separation_budget():
    with pytest.raises(BudgetExceededError):
        separation_delta(zero_one_three(0.35), 30)


@pytest.mark.parametrize("ifs, verdict", [
    (middle_third_cantor(), "disjoint"),
    (SimilarIFS.on_line((0.5, 0.5), (0.0, 0.5)), "touching"),
    (zero_one_three(Fraction(1, 3)), "overlapping"),
])
def test_interval_separation(ifs, verdict):
    assert interval_separation(ifs).verdict == verdict


def test_interval_separation_hull():
    report = interval_separation(zero_one_three(Fraction(1, 3)))
    assert report.hull == (pytest.approx(0.0), pytest.approx(4.5))


def test_product_set_dimensions():
    product, trivial = product_set_dimensions(1 / 3)
    assert product == pytest.approx(1 + math.log(2) / math.log(3))
    assert trivial == pytest.approx(math.log(6) / math.log(3))
    assert product_set_dimensions(0.1)[1] < 1.0
    assert product_set_dimensions(0.45)[1] == 2.0


@pytest.mark.parametrize("lam", np.linspace(0.34, 0.40, 13))
def test_product_set_below_trivial_bound(lam):
    product, trivial = product_set_dimensions(lam)
    assert product < trivial


def test_four_corner_points_stay_in_the_square():
    points = attractor_points(four_corner(), 20_000, seed=1)
    assert points.shape == (20_000, 2)
    assert points.min() >= 0.0 and points.max() <= 1.0
    # third base-4 digit of each coordinate is 0 or 3
    cells = np.floor(points * 64)
    assert np.isin(cells % 4, (0, 3)).all()


def test_shrinking_a_ratio_lowers_the_dimension():
    rng = np.random.default_rng(3)
    for _ in range(200):
        ratios = rng.uniform(0.05, 0.6, size=rng.integers(2, 6))
        shrunk = ratios.copy()
        i = rng.integers(ratios.size)
        shrunk[i] *= rng.uniform(0.5, 0.99)
        assert similarity_dimension(shrunk) < similarity_dimension(ratios)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_exact_overlap_persists_at_deeper_levels(n):
    report = separation_delta(zero_one_three(Fraction(1, 3)), n)
    assert report.levels[0].delta == 1.0
    assert all(level.delta == 0.0 for level in report.levels[1:])
    assert report.exact_overlap
    assert exact_overlap_search(zero_one_three(Fraction(1, 3)), n) is not None


def test_gasket_cloud_is_invariant_under_one_more_map():
    ifs = sierpinski_gasket()
    points = attractor_points(ifs, 500_000, seed=4)
    choice = np.random.default_rng(5).integers(ifs.m, size=len(points))
    moved = np.einsum("nij,nj->ni", ifs.linear[choice], points) + ifs.translation_array[choice]
    scales = [2.0 ** -k for k in range(4, 10)]
    before, after = box_count(points, scales), box_count(moved, scales)
    np.testing.assert_allclose(after.counts, before.counts, rtol=0.02)
    assert abs(after.slope - before.slope) < 0.02
