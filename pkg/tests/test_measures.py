import numpy as np
import pytest

from src.analysis.measures import chaos_game_sample, cylinder_approx, similarity_dimension
from src.core.errors import AtomBudgetError, ConfigError, InvalidMeasureError
from src.core.presets import PRESETS, cantor, four_corner, preset, two_scale_cantor
from src.models.ifs_measure import IFSMeasure
from src.models.similitude import Similitude


@pytest.fixture(scope='module')
def cantor_measure():
    return cantor()


def _random_pairs(count):
    rng = np.random.default_rng(20240611)
    sizes = rng.integers(2, 9, size=count)
    return [(int(m), float(rng.uniform(0.05, 0.95 / m))) for m in sizes]


@pytest.mark.parametrize("m,ratio", _random_pairs(20))
def test_equal_ratio_dimension(m, ratio):
    alpha = similarity_dimension([ratio] * m)
    assert alpha == pytest.approx(np.log(m) / np.log(1.0 / ratio), abs=1e-10)
    assert abs(m * ratio ** alpha - 1.0) <= 1e-10


def test_cantor_dimension(cantor_measure):
    assert cantor_measure.dimension_alpha == pytest.approx(np.log(2) / np.log(3), abs=1e-12)
    assert cantor_measure.moran_residual <= 1e-10


def test_two_scale_dimension_is_golden():
    measure = two_scale_cantor()
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    assert 2.0 ** -measure.dimension_alpha == pytest.approx(golden, abs=1e-12)
    assert measure.weights == pytest.approx(measure.ratios ** measure.dimension_alpha, abs=1e-12)


def test_similitude_maps_points():
    s = Similitude.planar(0.5, np.pi / 2, [1.0, 0.0])
    assert s.apply(np.array([[1.0, 0.0]])) == pytest.approx(np.array([[1.0, 0.5]]))
    assert s.apply(s.fixed_point()) == pytest.approx(s.fixed_point())


def test_similitude_rejects_expanding_ratio():
    with pytest.raises(InvalidMeasureError):
        Similitude.on_line(1.5, 0.0)


def test_moran_needs_two_maps():
    with pytest.raises(InvalidMeasureError):
        similarity_dimension([0.5])


def test_ifs_rejects_bad_weights():
    maps = [Similitude.on_line(1 / 3, 0.0), Similitude.on_line(1 / 3, 2 / 3)]
    with pytest.raises(InvalidMeasureError, match="sum"):
        IFSMeasure.from_maps(maps, ([0.0], [1.0]), weights=[0.5, 0.6])


def test_ifs_rejects_box_escape():
    maps = [Similitude.on_line(1 / 2, 0.0), Similitude.on_line(1 / 2, 0.75)]
    with pytest.raises(InvalidMeasureError, match="bounding box"):
        IFSMeasure.from_maps(maps, ([0.0], [1.0]))


def test_cylinders_first_levels(cantor_measure):
    level_one = cylinder_approx(cantor_measure, 1)
    assert level_one.locations[:, 0] == pytest.approx([0.0, 2 / 3])
    level_two = cylinder_approx(cantor_measure, 2)
    assert level_two.locations[:, 0] == pytest.approx([0.0, 2 / 9, 2 / 3, 8 / 9])
    assert level_two.weights.real == pytest.approx([0.25] * 4)


@pytest.mark.parametrize("depth", [0, 3, 8])
def test_cylinder_mass_and_order(cantor_measure, depth):
    atoms = cylinder_approx(cantor_measure, depth)
    assert atoms.size == 2 ** depth
    assert atoms.total_mass.real == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(atoms.locations[:, 0]) > 0), "Cantor words should come out left to right."


def test_cylinder_budget(cantor_measure):
    with pytest.raises(AtomBudgetError):
        cylinder_approx(cantor_measure, 5, atom_budget=16)


def test_planar_cylinders_stay_in_box():
    measure = four_corner()
    atoms = cylinder_approx(measure, 3)
    assert atoms.size == 64
    assert np.all(atoms.locations >= 0.0) and np.all(atoms.locations <= 1.0)


def test_chaos_game_is_seeded(cantor_measure):
    first = chaos_game_sample(cantor_measure, 500, seed=7)
    again = chaos_game_sample(cantor_measure, 500, seed=7)
    other = chaos_game_sample(cantor_measure, 500, seed=8)
    assert first.shape == (500, 1)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)
    assert np.all((first >= 0.0) & (first <= 1.0))
    # no sample may fall in the removed middle third
    assert not np.any((first > 1 / 3 + 1e-12) & (first < 2 / 3 - 1e-12))


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_are_valid(name):
    measure = preset(name)
    assert 0.0 < measure.dimension_alpha < measure.dim
    assert measure.osc_asserted


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        preset("koch")
