import numpy as np
import pytest

from src.analysis.geometry import (cell_content_ratios, cloud_resolution, covering_centers, covering_number,
                                   minkowski_content, neighborhood_volume, neighborhood_volume_bounds,
                                   packing_centers, packing_number,
                                   truncation_mass, truncation_masses_at_atoms, unit_ball_volume)
from src.analysis.measures import cylinder_approx
from src.core.errors import ResolutionError, UnsupportedDimensionError
from src.core.presets import cantor
from src.models.atomic_measure import AtomicMeasure, PointCloud


@pytest.fixture(scope='module')
def cantor_cloud():
    return PointCloud.from_measure(cylinder_approx(cantor(), 12))


def _clouds():
    rng = np.random.default_rng(1729)
    cases = []
    for index in range(50):
        n = 1 if index < 25 else 2
        points = rng.uniform(0.0, 1.0, size=(int(rng.integers(5, 60)), n))
        cases.append((index, PointCloud(points), np.sort(rng.uniform(0.02, 0.2, size=5))[::-1]))
    return cases


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == 2.0
    assert unit_ball_volume(2) == np.pi
    assert unit_ball_volume(3) == pytest.approx(4.0 * np.pi / 3.0)


def test_covering_on_a_grid():
    cloud = PointCloud(np.linspace(0.0, 1.0, 101))
    assert covering_number(cloud, 0.25) == 2


def test_single_point_counts():
    cloud = PointCloud(np.array([[0.3, 0.4]]))
    assert covering_number(cloud, 0.1) == 1
    assert packing_number(cloud, 0.1) == 1


def test_interval_union_volume():
    cloud = PointCloud(np.array([0.0, 1.0]))
    assert neighborhood_volume(cloud, 0.1) == pytest.approx(0.4)
    assert neighborhood_volume(cloud, 0.75) == pytest.approx(2.5)


def test_disc_area():
    cloud = PointCloud(np.array([[0.0, 0.0]]))
    assert neighborhood_volume(cloud, 0.1, grid_res=0.1 / 32) == pytest.approx(np.pi * 0.01, rel=1e-2)


def test_grid_resolution_guard():
    cloud = PointCloud(np.array([[0.0, 0.0]]))
    with pytest.raises(ResolutionError):
        neighborhood_volume(cloud, 0.1, grid_res=0.05)


def test_three_dimensions_unsupported():
    with pytest.raises(UnsupportedDimensionError):
        neighborhood_volume(PointCloud(np.zeros((2, 3))), 0.1)


def test_volume_bounds_bracket_the_disc():
    cloud = PointCloud(np.array([[0.0, 0.0]]))
    lower, upper = neighborhood_volume_bounds(cloud, 0.1, 0.1 / 16)
    assert lower <= np.pi * 0.01 <= upper
    assert lower <= neighborhood_volume(cloud, 0.1, 0.1 / 16) <= upper


def test_volume_bounds_are_exact_on_the_line():
    cloud = PointCloud(np.array([0.0, 0.3, 1.0]))
    lower, upper = neighborhood_volume_bounds(cloud, 0.1)
    assert lower == upper == pytest.approx(0.6)


def test_isolated_points_meet_the_packing_volume():
    # pairwise gaps above 2 eps: |A(eps)| is exactly N balls and the packing keeps every point
    cloud = PointCloud(np.array([0.0, 0.5, 1.25, 2.0]))
    eps = 0.1
    assert packing_number(cloud, eps) == 4
    assert neighborhood_volume(cloud, eps) == unit_ball_volume(1) * 4 * eps


@pytest.mark.parametrize("index,cloud,epsilons", _clouds())
def test_covering_packing_sandwich(index, cloud, epsilons):
    n = cloud.dim
    omega = unit_ball_volume(n)
    for eps in epsilons:
        cover, pack = covering_number(cloud, eps), packing_number(cloud, eps)
        assert covering_number(cloud, 2 * eps) <= pack <= covering_number(cloud, eps / 2), \
            f"Packing count out of its covering bounds for cloud {index} at eps = {eps}."
        lower, upper = neighborhood_volume_bounds(cloud, eps, eps / 16)
        assert omega * pack * eps ** n <= upper, f"Packing volume above |A(eps)| for cloud {index} at eps = {eps}."
        assert lower <= omega * cover * (2 * eps) ** n, \
            f"|A(eps)| above the covering volume for cloud {index} at eps = {eps}."


@pytest.mark.parametrize("index,cloud,epsilons", _clouds()[::7])
def test_witnesses_are_valid(index, cloud, epsilons):
    eps = float(epsilons[0])
    centers = covering_centers(cloud, eps)
    distances = np.linalg.norm(cloud.points[:, None, :] - centers[None, :, :], axis=2)
    assert np.all(distances.min(axis=1) <= eps + 1e-12), "Every point must lie in a closed covering ball."
    packed = packing_centers(cloud, eps)
    gaps = np.linalg.norm(packed[:, None, :] - packed[None, :, :], axis=2)
    np.fill_diagonal(gaps, np.inf)
    assert np.all(gaps >= 2 * eps - 1e-12), "Packing balls must be disjoint."


def test_cantor_content_is_bounded(cantor_cloud):
    alpha = np.log(2) / np.log(3)
    estimate = minkowski_content(cantor_cloud, alpha, 3.0 ** -np.arange(4, 11, dtype=float))
    assert estimate.lower_est > 0
    assert estimate.spread_ratio < 1.5


def test_content_threads_do_not_change_values(cantor_cloud):
    alpha = np.log(2) / np.log(3)
    epsilons = 3.0 ** -np.arange(4, 9, dtype=float)
    serial = minkowski_content(cantor_cloud, alpha, epsilons, threads=1)
    threaded = minkowski_content(cantor_cloud, alpha, epsilons, threads=4)
    assert np.array_equal(serial.values, threaded.values)


def test_content_below_resolution():
    cloud = PointCloud(np.array([0.0, 1e-3]))
    assert cloud_resolution(cloud) == pytest.approx(1e-3)
    with pytest.raises(ResolutionError):
        minkowski_content(cloud, 0.5, [1e-2, 1e-4])


def test_truncation_masses():
    atoms = cylinder_approx(cantor(), 2)
    assert truncation_mass(atoms, [0.5]) == pytest.approx(0.5)
    assert truncation_masses_at_atoms(atoms) == pytest.approx([0.25, 0.5, 0.75, 1.0])


def test_planar_truncation_masses():
    atoms = AtomicMeasure(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), np.full(4, 0.25))
    assert truncation_masses_at_atoms(atoms, chunk=3) == pytest.approx([0.25, 0.5, 0.5, 1.0])


def test_cell_ratios_per_cell(cantor_cloud):
    alpha = np.log(2) / np.log(3)
    weights = np.full(len(cantor_cloud), 1.0 / len(cantor_cloud))
    ratios = cell_content_ratios(cantor_cloud, weights, alpha, 1 / 3, 3.0 ** -np.arange(2, 8, dtype=float))
    assert ratios.shape == (2,)
    # the two halves are copies of each other
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-9)


def test_cell_ratios_use_each_cell_resolution():
    cloud = PointCloud(np.array([0.0, 0.2, 0.5, 0.5001]))
    ratios = cell_content_ratios(cloud, np.full(4, 0.25), 0.5, 0.4, [0.3, 0.1, 0.01])
    assert ratios.shape == (2,) and np.all(ratios > 0)
    # the first cell's only gap exceeds every scale, so it drops out
    sparse = PointCloud(np.array([0.0, 0.35, 0.5, 0.5001]))
    assert cell_content_ratios(sparse, np.full(4, 0.25), 0.5, 0.4, [0.3, 0.1, 0.01]).shape == (1,)
