import math

import numpy as np
import pytest

from PressureDim.errors import BudgetExceededError, RootNotBracketedError, ValidationError
from PressureDim.numerics.chaos import chaos_game
from PressureDim.numerics.perron import (
    is_primitive_pattern,
    perron_data,
    primitivity_power,
    spectral_radius,
    wielandt_bound,
)
from PressureDim.numerics.roots import clamped_root, pressure_root
from PressureDim.numerics.words import admissible_rows, all_words, check_budget

GOLDEN = [[1, 1], [1, 0]]
PHI = (1 + math.sqrt(5)) / 2


def test_golden_mean_is_primitive_with_exponent_two():
    assert is_primitive_pattern(GOLDEN)
    assert primitivity_power(GOLDEN) == 2


def test_permutation_matrix_is_not_primitive():
    swap = [[0, 1], [1, 0]]
    assert not is_primitive_pattern(swap)
    assert primitivity_power(swap) is None


def test_wielandt_bound():
    assert wielandt_bound(2) == 2
    assert wielandt_bound(4) == 10


def test_perron_data_of_golden_matrix():
    data = perron_data(GOLDEN)
    assert data.root == pytest.approx(PHI, abs=1e-12)
    assert data.right.sum() == pytest.approx(1.0)
    assert data.right[0] / data.right[1] == pytest.approx(PHI, rel=1e-10)


def test_spectral_radius_falls_back_on_periodic_patterns():
    assert spectral_radius([[0, 2], [2, 0]]) == pytest.approx(2.0)
    assert spectral_radius(np.zeros((3, 3))) == 0.0


def test_pressure_root_of_linear_curve():
    assert pressure_root(lambda s: 1.0 - s, (0.0, 2.0)) == pytest.approx(1.0, abs=1e-10)


def test_pressure_root_without_sign_change():
    with pytest.raises(RootNotBracketedError, match="root not bracketed"):
        pressure_root(lambda s: 1.0 + s, (0.0, 2.0))


def test_clamped_root_pins_constant_sign_curves():
    assert clamped_root(lambda s: -1.0, 0.0, 2.0) == 0.0
    assert clamped_root(lambda s: 1.0, 0.0, 2.0) == 2.0


def test_budget_exceeded_suggests_smaller_n():
    with pytest.raises(BudgetExceededError) as info:
        check_budget(2, 30)
    assert info.value.suggested_n == 23
    assert "try n <= 23" in str(info.value)


def test_budget_rejects_empty_words():
    with pytest.raises(ValidationError):
        check_budget(2, 0)


def test_all_words_lexicographic():
    assert all_words(2, 2).tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_admissible_rows_golden_mean():
    words = all_words(2, 3)
    assert admissible_rows(np.array(GOLDEN), words).sum() == 5


def test_chaos_game_is_seeded():
    linear = np.tile(0.5 * np.eye(2), (3, 1, 1))
    translations = np.array([[0, 0], [0.5, 0], [0, 0.5]])
    first = chaos_game(linear, translations, 5000, seed=7)
    second = chaos_game(linear, translations, 5000, seed=7)
    assert first.shape == (5000, 2)
    np.testing.assert_array_equal(first, second)
    assert first.min() >= 0 and first.max() <= 1
