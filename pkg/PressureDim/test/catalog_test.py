import numpy as np
import pytest

from PressureDim.barnsley import graph_value, repeller_points, validate
from PressureDim.catalog import (
    BARNSLEY_CATALOG,
    carpet_ifs,
    fractal_interpolation_system,
    takagi_system,
)
from PressureDim.errors import ValidationError


def test_takagi_value_at_one_third():
    # dist(2^n / 3, Z) = 1/3 for every n
    expected = sum((2 / 3) ** n / 3 for n in range(40))
    assert graph_value(takagi_system(1.5), 1 / 3, 40) == pytest.approx(expected, abs=1e-9)


def test_takagi_scale_is_linear():
    single = graph_value(takagi_system(1.5), 0.2, 40)
    double = graph_value(takagi_system(1.5, scale=2.0), 0.2, 40)
    assert double == pytest.approx(2 * single, abs=1e-9)


def test_takagi_repeller_is_nonnegative():
    system = takagi_system(1.5)
    validate(system)
    cloud = repeller_points(system, 2000, 60, seed=0)
    ys = cloud.points[:, 1]
    assert ys.min() >= -cloud.tail_bound
    assert ys.max() <= 1.5 + cloud.tail_bound


def test_fractal_interpolation_hits_end_points():
    system = fractal_interpolation_system([(0.0, 0.2), (0.5, 1.0), (1.0, 0.4)], [0.5, 0.5])
    validate(system)
    assert graph_value(system, 0.0, 60) == pytest.approx(0.2, abs=1e-12)
    assert graph_value(system, 1.0, 60) == pytest.approx(0.4, abs=1e-12)


@pytest.mark.parametrize("points, scalings, field_path", [
    ([(0.0, 0.0)], [], "system.points"),
    ([(0.0, 0.0), (1.0, 1.0)], [0.5, 0.5], "system.scalings"),
    ([(0.0, 0.0), (1.0, 1.0)], [1.0], "system.scalings"),
])
def test_fractal_interpolation_rejects(points, scalings, field_path):
    with pytest.raises(ValidationError) as info:
        fractal_interpolation_system(points, scalings)
    assert info.value.field_path == field_path


def test_catalog_names():
    assert {"doubling", "golden_mean", "non_markov_transitive", "takagi"} <= set(BARNSLEY_CATALOG)


def test_carpet_cells():
    ifs = carpet_ifs(3, 5, [(0, 0), (2, 4)])
    np.testing.assert_allclose(ifs.translations, [[0.0, 0.0], [2 / 3, 0.8]])
    with pytest.raises(ValidationError):
        carpet_ifs(3, 5, [(3, 0)])
    with pytest.raises(ValidationError):
        carpet_ifs(1, 5, [(0, 0)])
