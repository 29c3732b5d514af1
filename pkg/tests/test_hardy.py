import numpy as np
import pytest

from src.analysis.hardy import (besicovitch_average, besicovitch_norm, fractal_hardy_lhs, hardy_sum,
                                hardy_sum_unrearranged, merge_frequencies, nonincreasing_rearrangement, rhs_series,
                                theorem_lhs, verify_inequality)
from src.analysis.measures import cylinder_approx
from src.core.errors import InconsistentSetupError, InvalidMeasureError
from src.core.presets import cantor
from src.models.atomic_measure import AtomicMeasure, WeightedMeasure
from src.models.series import dyadic_grid
from src.models.verdict import HardySetup, TheoremId, range_violations


@pytest.fixture(scope='module')
def cantor_measure():
    return cantor()


@pytest.fixture(scope='module')
def cantor_atoms(cantor_measure):
    return cylinder_approx(cantor_measure, 10)


def harmonic_sum(count):
    k = np.arange(1, count + 1, dtype=float)
    return AtomicMeasure.on_line(k, 1.0 / k)


def discrete_setup(u, p, grid):
    return HardySetup(WeightedMeasure.uniform(u), p, TheoremId.DISCRETE_HARDY, grid, 0.0)


def test_rearrangement_is_descending():
    assert list(nonincreasing_rearrangement([0.5, -2.0, 1j])) == [2.0, 1.0, 0.5]


def test_hardy_sum_small_cases():
    assert hardy_sum([1.0], 1.5) == pytest.approx(1.0)
    assert hardy_sum([0.5, 1.0], 1.0) == pytest.approx(1.25)
    assert hardy_sum_unrearranged([0.5, 1.0], 1.0) == pytest.approx(1.0)


@pytest.mark.parametrize("p", [1.0, 1.3, 1.7, 2.0])
def test_rearranging_never_decreases(p):
    c = np.random.default_rng(11).normal(size=40) + 1j * np.random.default_rng(12).normal(size=40)
    assert hardy_sum_unrearranged(c, p) <= hardy_sum(c, p) + 1e-12


def test_hardy_sum_rejects_p():
    with pytest.raises(InconsistentSetupError, match=r"p in \[1,2\]"):
        hardy_sum([1.0], 3.0)


def test_merge_coinciding_frequencies():
    u = AtomicMeasure.on_line([1.0, 0.0, 1.0], [1.0, 2.0, 3.0])
    merged = merge_frequencies(u)
    assert merged.locations[:, 0] == pytest.approx([0.0, 1.0])
    assert merged.weights == pytest.approx([2.0, 4.0])


def test_single_frequency_mean():
    u = AtomicMeasure.on_line([0.0], [1.0])
    assert besicovitch_average(u, 1.0, 10.0) == pytest.approx(2.0, rel=1e-12)


def _random_sums(count):
    rng = np.random.default_rng(99)
    cases = []
    for _ in range(count):
        size = int(rng.integers(2, 7))
        freqs = np.arange(size) + 0.25 * rng.uniform(size=size) - size / 2
        coeffs = rng.normal(size=size) + 1j * rng.normal(size=size)
        cases.append(AtomicMeasure.on_line(freqs, coeffs))
    return cases


@pytest.mark.parametrize("u", _random_sums(10))
def test_parseval_mean(u):
    series = besicovitch_norm(u, 2.0, dyadic_grid(2.0, 6, 5))
    expected = 2.0 * float(np.sum(np.abs(u.weights) ** 2))
    assert series.values[-1] == pytest.approx(expected, rel=0.02)


def test_besicovitch_is_line_only():
    with pytest.raises(InvalidMeasureError):
        besicovitch_norm(AtomicMeasure.unit_atom([0.0, 0.0]), 2.0, [1.0, 2.0])


def test_single_atom_verdict():
    report = verify_inequality(discrete_setup(AtomicMeasure.on_line([0.0], [1.0]), 1.5, dyadic_grid(2.0, 0, 6)))
    assert report.lhs == pytest.approx(1.0)
    assert report.rhs_series.liminf_est == pytest.approx(2.0)
    assert report.empirical_C == pytest.approx(0.5)
    assert report.stable and report.passed


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0])
def test_harmonic_constant_is_stable(p):
    grid = dyadic_grid(2.0, 3, 6)
    small = verify_inequality(discrete_setup(harmonic_sum(64), p, grid))
    large = verify_inequality(discrete_setup(harmonic_sum(128), p, grid))
    assert small.stable and large.stable
    assert np.isfinite(small.empirical_C)
    assert large.empirical_C == pytest.approx(small.empirical_C, rel=0.2)


def test_harmonic_parseval_constant():
    report = verify_inequality(discrete_setup(harmonic_sum(64), 2.0, dyadic_grid(2.0, 3, 6)))
    assert report.empirical_C == pytest.approx(0.5, rel=0.02)


def test_fractal_hardy_two_atoms():
    base = AtomicMeasure.on_line([0.0, 1.0], [0.5, 0.5])
    setup = HardySetup(WeightedMeasure.uniform(base), 1.0, TheoremId.FRACTAL_HARDY, [1.0, 2.0], 0.5)
    assert fractal_hardy_lhs(setup) == pytest.approx(1.5)


def test_fractal_hardy_at_two_is_l2_mass(cantor_atoms, cantor_measure):
    setup = HardySetup(WeightedMeasure.uniform(cantor_atoms), 2.0, TheoremId.FRACTAL_HARDY, [1.0, 2.0],
                       cantor_measure.dimension_alpha)
    assert fractal_hardy_lhs(setup) == pytest.approx(1.0, abs=1e-12)


def test_fractal_hardy_rejects_p():
    base = AtomicMeasure.on_line([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(InconsistentSetupError, match=r"p in \[1,2\]"):
        HardySetup(WeightedMeasure.uniform(base), 3.0, TheoremId.FRACTAL_HARDY, [1.0, 2.0], 0.5)


def test_range_checks():
    assert range_violations(TheoremId.LOWER_BOUND_P, 2.5, 1, np.log(2) / np.log(3)) == []
    problems = range_violations(TheoremId.LOWER_BOUND_P, 3.5, 1, np.log(2) / np.log(3))
    assert problems and "2n/alpha" in problems[0]
    assert range_violations(TheoremId.DISCRETE_HARDY, 1.0, 2, 0.0)


@pytest.mark.parametrize("theorem,p", [
    (TheoremId.LOWER_BOUND_P, 2.0),
    (TheoremId.LOWER_BOUND_P, 2.5),
    (TheoremId.LOWER_BOUND, 2.0),
    (TheoremId.L2_DENSITY, 2.0),
    (TheoremId.LOWER_BOUND_GAUSSIAN, 2.0),
    (TheoremId.MASS_LOWER_BOUND, 2.0),
    (TheoremId.FRACTAL_HARDY, 2.0),
    (TheoremId.FRACTAL_HARDY, 1.5),
])
def test_cantor_verdicts_pass(cantor_atoms, cantor_measure, theorem, p):
    setup = HardySetup(WeightedMeasure.uniform(cantor_atoms), p, theorem, dyadic_grid(2.0, 4, 8),
                       cantor_measure.dimension_alpha, source=cantor_measure)
    report = verify_inequality(setup)
    assert report.stable, report.to_text()
    assert np.isfinite(report.empirical_C) and report.empirical_C > 0
    assert report.passed


def test_lower_bound_constant_is_grid_stable(cantor_measure):
    alpha = cantor_measure.dimension_alpha
    constants = []
    for depth, top in [(10, 12), (12, 13)]:
        atoms = cylinder_approx(cantor_measure, depth)
        setup = HardySetup(WeightedMeasure.uniform(atoms), 2.5, TheoremId.LOWER_BOUND_P,
                           dyadic_grid(2.0, 4, top - 3), alpha, source=cantor_measure)
        constants.append(verify_inequality(setup).empirical_C)
    assert constants[1] == pytest.approx(constants[0], rel=0.2)


def test_fractal_hardy_at_one_is_finite(cantor_atoms, cantor_measure):
    setup = HardySetup(WeightedMeasure.uniform(cantor_atoms), 1.0, TheoremId.FRACTAL_HARDY, dyadic_grid(2.0, 4, 6),
                       cantor_measure.dimension_alpha, source=cantor_measure)
    assert np.isfinite(theorem_lhs(setup))


def test_fractal_hardy_at_one_is_depth_stable(cantor_measure):
    # p = 1 sits at the edge of the range: both refinements must stay stable within 20%
    alpha = cantor_measure.dimension_alpha
    reports = []
    for depth, top in [(10, 10), (12, 12)]:
        atoms = cylinder_approx(cantor_measure, depth)
        setup = HardySetup(WeightedMeasure.uniform(atoms), 1.0, TheoremId.FRACTAL_HARDY,
                           dyadic_grid(2.0, 4, top - 3), alpha, source=cantor_measure)
        reports.append(verify_inequality(setup))
    assert all(report.stable for report in reports), "\n".join(report.to_text() for report in reports)
    assert reports[1].empirical_C == pytest.approx(reports[0].empirical_C, rel=0.2)


def test_nonconstant_density_sums_atoms(cantor_measure):
    atoms = cylinder_approx(cantor_measure, 6)
    density = 1.0 + atoms.locations[:, 0]
    setup = HardySetup(WeightedMeasure(atoms, density), 2.0, TheoremId.LOWER_BOUND_P, dyadic_grid(2.0, 3, 4),
                       cantor_measure.dimension_alpha, source=cantor_measure)
    series, method = rhs_series(setup)
    assert "directly" in method
    assert series.values.min() > 0


def test_verdict_text_and_row():
    report = verify_inequality(discrete_setup(AtomicMeasure.on_line([0.0], [1.0]), 1.0, [1.0, 2.0]))
    row = report.to_row()
    assert row["theorem"] == "discrete_hardy" and row["passed"] is True
    assert "PASS" in report.to_text()
