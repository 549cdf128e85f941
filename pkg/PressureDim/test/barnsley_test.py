import math

import numpy as np
import pytest

from PressureDim.barnsley import (
    BarnsleySystem,
    Branch,
    PressureEnvelope,
    admissible_words,
    barnsley_dimension,
    bernoulli_dimension_sup,
    classify_diagonality,
    extract_markov_subsystems,
    forward_orbit,
    graph_value,
    hofbauer_pressure,
    is_markov,
    markov_pressure,
    repeller_points,
    skew_lyapunov_dimension,
    skew_lyapunov_exponents,
    tail_bound,
    transitivity_check,
    validate,
)
from PressureDim.catalog import (
    GOLDEN_RATIO,
    doubling_system,
    full_branch_system,
    golden_mean_system,
    non_markov_system,
    transitive_non_markov_system,
)
from PressureDim.errors import NumericError, ValidationError

SQRT2 = math.sqrt(2)


@pytest.fixture
def doubling():
    return doubling_system()


def split_system():
    """Two invariant halves, each mapped onto itself by two branches."""
    branches = (
        Branch(2.0, 0.0, 0.0, 1.5, 0.0),
        Branch(2.0, -0.5, 0.0, 1.5, 0.0),
        Branch(2.0, -0.5, 0.0, 1.5, 0.0),
        Branch(2.0, -1.0, 0.0, 1.5, 0.0),
    )
    return BarnsleySystem((0.0, 0.25, 0.5, 0.75, 1.0), branches)


def tripling_system():
    return full_branch_system(3, 3.0, 2.0, a=(1.0, -1.0, 0.5), t=(0.0, 0.3, -0.2))


# ----------------------------
# Validation
# ----------------------------

def test_doubling_is_in_theorem_mode(doubling):
    diagnostics = validate(doubling)
    assert diagnostics.theorem_mode
    assert diagnostics.markov
    assert diagnostics.images == [(0.0, 1.0), (0.0, 1.0)]


def test_contracting_branch_rejected():
    system = BarnsleySystem((0.0, 0.5, 1.0), (Branch(0.9, 0.0, 0.0, 2.0, 0.0), Branch(2.0, -1.0, 0.0, 1.5, 0.0)))
    with pytest.raises(ValidationError, match="not expanding") as info:
        validate(system)
    assert info.value.field_path == "system.branches[0]"


def test_branch_leaving_the_interval_rejected():
    system = BarnsleySystem((0.0, 0.5, 1.0), (Branch(2.0, 0.6, 0.0, 1.5, 0.0), Branch(2.0, -1.0, 0.0, 1.5, 0.0)))
    with pytest.raises(ValidationError, match=r"leaves \[0,1\]"):
        validate(system)


def test_partition_must_cover_the_interval():
    with pytest.raises(ValidationError):
        BarnsleySystem((0.0, 0.5, 0.9), (Branch(2.0, 0.0, 0.0, 1.5, 0.0),) * 2)


def test_slow_base_leaves_theorem_mode():
    diagnostics = validate(doubling_system(lam=3.0))
    assert not diagnostics.theorem_mode
    assert diagnostics.notes


@pytest.mark.parametrize("system, markov", [
    (doubling_system(), True),
    (golden_mean_system(), True),
    (non_markov_system(), False),
])
def test_is_markov(system, markov):
    assert is_markov(system) == markov


# ----------------------------
# Cylinders
# ----------------------------

def test_doubling_cylinders(doubling):
    level = admissible_words(doubling, 3)
    assert len(level) == 8
    labels = level.labels()
    assert labels == sorted(labels)
    k = labels.index((1, 2, 1))
    np.testing.assert_allclose(level.hull[k], [0.25, 0.375])
    np.testing.assert_allclose(level.image[k], [0.0, 1.0])


def test_golden_mean_counts_are_fibonacci():
    system = golden_mean_system()
    assert [len(admissible_words(system, n)) for n in range(1, 7)] == [2, 3, 5, 8, 13, 21]


def test_non_markov_counts():
    system = non_markov_system()
    counts = [len(admissible_words(system, n)) for n in range(1, 7)]
    assert counts == [2, 4, 7, 12, 20, 32]
    assert 21 < counts[-1] < 64


def test_transitivity(doubling):
    assert all(transitivity_check(doubling, n) for n in (1, 2, 3))
    assert transitivity_check(golden_mean_system(), 3)
    assert not transitivity_check(split_system(), 1)
    assert not transitivity_check(split_system(), 3)


# ----------------------------
# Diagonality
# ----------------------------

def test_zero_shears_are_diagonal(doubling):
    assert classify_diagonality(doubling).kind == "Diagonal"


def test_equal_shears_are_essentially_diagonal():
    result = classify_diagonality(doubling_system(a=(1.0, 1.0)))
    assert result.kind == "EssentiallyDiagonal"
    assert result.conjugation == pytest.approx(1.0 / (SQRT2 - 2.0))


def test_unequal_shears_have_a_witness():
    result = classify_diagonality(doubling_system(a=(1.0, 2.0)))
    assert result.kind == "EssentiallyNonDiagonal"
    assert result.witness == ((1,), (2,))
    assert result.connector == ()


# ----------------------------
# Markov pressure
# ----------------------------

@pytest.mark.parametrize("s, expected", [
    (0.0, math.log(2)),
    (1.0, 0.5 * math.log(2)),
    (1.5, 0.0),
    (2.0, -0.5 * math.log(2)),
])
def test_markov_pressure_of_doubling(doubling, s, expected):
    subsystem = extract_markov_subsystems(doubling, 1)
    assert markov_pressure(doubling, subsystem, s) == pytest.approx(expected, abs=1e-12)


def test_markov_pressure_decreases(doubling):
    subsystem = extract_markov_subsystems(doubling, 1)
    values = [markov_pressure(doubling, subsystem, s) for s in np.linspace(0, 2, 41)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_markov_pressure_continuous_at_one():
    system = full_branch_system(2, 2.0, (1.5, 1.8))
    subsystem = extract_markov_subsystems(system, 1)
    at_one = markov_pressure(system, subsystem, 1.0)
    assert markov_pressure(system, subsystem, 1.0 + 1e-13) == pytest.approx(at_one, abs=1e-12)
    assert at_one == pytest.approx(math.log(1 / 1.5 + 1 / 1.8), abs=1e-12)


def test_markov_pressure_outside_range(doubling):
    with pytest.raises(ValidationError):
        markov_pressure(doubling, extract_markov_subsystems(doubling, 1), 2.5)


def test_non_markov_extraction_keeps_two_fixed_cylinders():
    subsystem = extract_markov_subsystems(non_markov_system(), 2)
    assert subsystem.labels() == [(1, 1), (2, 2)]
    np.testing.assert_array_equal(subsystem.transition, [[1, 0], [1, 1]])


def test_full_branch_extraction_keeps_everything(doubling):
    subsystem = extract_markov_subsystems(doubling, 3)
    assert len(subsystem) == 8
    assert subsystem.transition.all()


def test_hofbauer_bounds_collapse_for_markov(doubling):
    lower, upper = hofbauer_pressure(doubling, 1.5, 4)
    assert lower == pytest.approx(0.0, abs=1e-12)
    assert upper == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5])
def test_hofbauer_bounds_tighten(s):
    widths = []
    for n_max in range(2, 7):
        lower, upper = hofbauer_pressure(non_markov_system(), s, n_max)
        assert lower <= upper + 1e-12
        widths.append(upper - lower)
    assert all(b <= a + 1e-12 for a, b in zip(widths, widths[1:]))


# ----------------------------
# Dimension
# ----------------------------

@pytest.mark.parametrize("lam, expected", [
    (SQRT2, 1.5),
    (1.5, 1 + math.log2(4 / 3)),
])
def test_doubling_dimension(lam, expected):
    report = barnsley_dimension(doubling_system(lam=lam))
    assert report.value == pytest.approx(expected, abs=1e-8)
    assert report.width < 1e-8
    assert report.bracket[0] <= expected <= report.bracket[1]
    assert report.details["markov"]
    assert report.details["diagonality"] == "Diagonal"


def test_golden_mean_dimension():
    system = golden_mean_system(1.2)
    expected = 2 - math.log(1.2) / math.log(GOLDEN_RATIO)
    report = barnsley_dimension(system)
    assert report.value == pytest.approx(expected, abs=1e-8)

    envelope = PressureEnvelope(system, 8)
    assert envelope.markov_pressure(expected - 1e-6) > 0
    assert envelope.markov_pressure(expected + 1e-6) < 0


def test_non_markov_dimension_bracket_is_ordered():
    report = barnsley_dimension(transitive_non_markov_system(), n_max=6)
    assert 0.0 <= report.bracket[0] <= report.bracket[1] <= 2.0
    assert report.details["lower_root"] <= report.details["upper_root"]
    assert not report.details["markov"]
    assert any("may not close" in note for note in report.notes)


def test_transitive_non_markov_counts():
    system = transitive_non_markov_system()
    assert not is_markov(system)
    assert [len(admissible_words(system, n)) for n in range(1, 5)] == [2, 4, 7, 13]
    assert transitivity_check(system, 3)


def test_dimension_refuses_slow_base():
    with pytest.raises(ValidationError, match="hypotheses"):
        barnsley_dimension(doubling_system(lam=3.0))


@pytest.mark.parametrize("system", [split_system(), non_markov_system()])
def test_dimension_refuses_non_transitive_base(system):
    with pytest.raises(ValidationError, match="not transitive"):
        barnsley_dimension(system)


# ----------------------------
# Lyapunov adapter
# ----------------------------

def test_skew_lyapunov_of_uniform_weights(doubling):
    chi_x, chi_y = skew_lyapunov_exponents(doubling, [0.5, 0.5])
    assert chi_x == pytest.approx(math.log(2))
    assert chi_y == pytest.approx(0.5 * math.log(2))
    assert skew_lyapunov_dimension(math.log(2), chi_x, chi_y) == pytest.approx(1.5)


def test_skew_lyapunov_dimension_when_base_is_slower():
    assert skew_lyapunov_dimension(math.log(2), 1.0, 2.0) == pytest.approx(math.log(2))


def test_skew_lyapunov_weights_validated(doubling):
    with pytest.raises(ValidationError):
        skew_lyapunov_exponents(doubling, [0.7, 0.7])


def test_bernoulli_sup_of_doubling(doubling):
    best, q = bernoulli_dimension_sup(doubling)
    assert best == pytest.approx(1.5, abs=1e-3)
    assert q[0] == pytest.approx(0.5, abs=0.01)


def test_bernoulli_sup_reaches_pressure_zero():
    system = full_branch_system(2, 2.0, (SQRT2, 1.6))
    best, _ = bernoulli_dimension_sup(system)
    assert best == pytest.approx(1 + math.log2(1 / SQRT2 + 1 / 1.6), abs=1e-3)


def test_bernoulli_sup_needs_full_branches():
    with pytest.raises(ValidationError, match="full-branch"):
        bernoulli_dimension_sup(golden_mean_system())


# ----------------------------
# Graph of G
# ----------------------------

def test_unsheared_repeller_is_flat(doubling):
    cloud = repeller_points(doubling, 500, depth=40, seed=0)
    assert cloud.points.shape == (500, 2)
    assert (cloud.points[:, 1] == 0).all()
    assert ((cloud.points[:, 0] >= 0) & (cloud.points[:, 0] <= 1)).all()


def test_graph_value_at_fixed_point():
    system = doubling_system(t=(0.5, 0.5))
    assert float(graph_value(system, 0.0, 200)) == pytest.approx(0.5 / (1 - SQRT2), abs=1e-12)


def test_truncation_error_within_tail_bound():
    system = tripling_system()
    x = np.array([0.1234, 0.377, 0.8123])
    shallow, deep = graph_value(system, x, 30), graph_value(system, x, 60)
    assert (np.abs(shallow - deep) <= tail_bound(system, 30)).all()


def test_graph_is_invariant():
    system = tripling_system()
    depth = 60
    x = np.array([0.1234, 0.377, 0.8123])
    orbit, branches = forward_orbit(system, x, depth)
    here = graph_value(system, x, depth)
    there = graph_value(system, orbit[1], depth - 1)
    lam, a, t = system.column("lam")[branches[0]], system.column("a")[branches[0]], system.column("t")[branches[0]]
    assert (np.abs(lam * here + a * x + t - there) <= tail_bound(system, depth - 1) + 1e-12).all()


def test_orbit_through_partition_point(doubling):
    with pytest.raises(NumericError, match="partition point"):
        forward_orbit(doubling, 0.25, 5)


def test_repeller_points_are_seeded():
    system = tripling_system()
    first = repeller_points(system, 300, depth=40, seed=11)
    second = repeller_points(system, 300, depth=40, seed=11)
    np.testing.assert_array_equal(first.points, second.points)
    assert first.tail_bound == pytest.approx(tail_bound(system, 40))
    assert list(first.to_frame().columns) == ["x", "y"]


def test_repeller_points_lie_on_the_graph():
    system = tripling_system()
    depth = 45
    cloud = repeller_points(system, 100, depth=depth, seed=3)
    x, y = cloud.points[:, 0], cloud.points[:, 1]
    # forward orbits of the samples retrace the sampled branches for the first steps
    shallow = 15
    assert (np.abs(graph_value(system, x, shallow) - y) <= tail_bound(system, shallow) + cloud.tail_bound).all()
