import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from src.core.errors import BudgetExceededError, InvalidMeasureError, ResolutionError, UnsupportedDimensionError
from src.core.parallel import ordered_map
from src.models.atomic_measure import AtomicMeasure, PointCloud
from src.models.series import ContentEstimate

logger = logging.getLogger(__name__)

GRID_CELL_CAP = 2 ** 24
CHUNK_CELLS = 2 ** 18
DEFAULT_GRID_FRACTION = 0.125


def unit_ball_volume(n: int) -> float:
    """Omega_n, the Lebesgue volume of the unit ball in R^n (exactly 2 and pi for n = 1, 2)."""
    volume = 1.0 if n % 2 == 0 else 2.0
    for k in range(2 + n % 2, n + 1, 2):
        volume *= 2.0 * np.pi / k
    return float(volume)


def cloud_resolution(cloud: PointCloud) -> float:
    """Smallest positive nearest-neighbour distance of the cloud (0 for a single site)."""
    if len(cloud) < 2:
        return 0.0
    distances, _ = cKDTree(cloud.points).query(cloud.points, k=2)
    gaps = distances[:, 1]
    gaps = gaps[gaps > 0]
    return float(gaps.min()) if gaps.size else 0.0


def _check_volume_args(epsilon: float, grid_res: Optional[float]) -> float:
    if epsilon <= 0:
        raise InvalidMeasureError(f"epsilon must be positive, got {epsilon}")
    if grid_res is None:
        grid_res = epsilon * DEFAULT_GRID_FRACTION
    if grid_res <= 0 or grid_res > epsilon / 4:
        raise ResolutionError(f"grid resolution {grid_res:g} is coarser than epsilon/4 = {epsilon / 4:g}")
    return grid_res


def neighborhood_volume(cloud: PointCloud, epsilon: float, grid_res: Optional[float] = None) -> float:
    """Lebesgue volume of A(eps), the union of open eps-balls around the cloud.

    On the line the union of intervals is merged exactly. In the plane the
    volume is the area of grid cells whose centre lies in A(eps).

    Raises:
        ResolutionError: If grid_res > epsilon / 4
        UnsupportedDimensionError: For n >= 3
    """
    grid_res = _check_volume_args(epsilon, grid_res)
    if cloud.dim == 1:
        return _line_length(cloud.points[:, 0], epsilon)
    if cloud.dim == 2:
        return _grid_area(cloud.points, epsilon, grid_res)
    raise UnsupportedDimensionError(f"neighborhood volume supports n in {{1, 2}}, got n = {cloud.dim}")


def neighborhood_volume_bounds(cloud: PointCloud, epsilon: float,
                               grid_res: Optional[float] = None) -> Tuple[float, float]:
    """Guaranteed lower and upper bounds on |A(eps)|.

    On the line both bounds are the exact length. In the plane a cell of side h
    lies inside A(eps) when its centre is closer than eps - h/sqrt(2), and every
    cell meeting A(eps) has its centre closer than eps + h/sqrt(2).
    """
    grid_res = _check_volume_args(epsilon, grid_res)
    if cloud.dim == 1:
        length = _line_length(cloud.points[:, 0], epsilon)
        return length, length
    if cloud.dim == 2:
        half_diagonal = grid_res / np.sqrt(2.0)
        return (_grid_area(cloud.points, epsilon - half_diagonal, grid_res),
                _grid_area(cloud.points, epsilon + half_diagonal, grid_res))
    raise UnsupportedDimensionError(f"neighborhood volume supports n in {{1, 2}}, got n = {cloud.dim}")


def _line_length(x: np.ndarray, epsilon: float) -> float:
    # one full 2 eps per connected component, plus the gaps shorter than 2 eps
    gaps = np.diff(np.sort(x))
    short = gaps[gaps < 2 * epsilon]
    return float(2 * epsilon * (gaps.size - short.size + 1) + np.sum(short))


def _grid_area(points: np.ndarray, radius: float, h: float) -> float:
    lower = points.min(axis=0) - radius
    counts = np.ceil((points.max(axis=0) + radius - lower) / h).astype(np.int64)
    if int(np.prod(counts)) > GRID_CELL_CAP:
        raise BudgetExceededError(
            f"area grid needs {int(np.prod(counts))} cells, over the cap of {GRID_CELL_CAP}; use a larger epsilon"
        )
    tree = cKDTree(points)
    ys = lower[1] + (np.arange(counts[1]) + 0.5) * h
    rows = max(1, CHUNK_CELLS // int(counts[1]))
    inside = 0
    for start in range(0, int(counts[0]), rows):
        xs = lower[0] + (np.arange(start, min(start + rows, counts[0])) + 0.5) * h
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        distances, _ = tree.query(np.column_stack([gx.ravel(), gy.ravel()]), distance_upper_bound=radius)
        inside += int(np.count_nonzero(distances < radius))
    return inside * h * h


def covering_centers(cloud: PointCloud, epsilon: float) -> np.ndarray:
    """Centres of a greedy cover of the cloud by closed eps-balls."""
    if epsilon <= 0:
        raise InvalidMeasureError(f"epsilon must be positive, got {epsilon}")
    if cloud.dim == 1:
        x = np.sort(cloud.points[:, 0])
        centers = []
        i = 0
        while i < x.size:
            centers.append(x[i] + epsilon)
            i = int(np.searchsorted(x, x[i] + 2 * epsilon, side="right"))
        return np.array(centers).reshape(-1, 1)
    return _farthest_point_centers(cloud.points, lambda reach: reach <= epsilon)


def packing_centers(cloud: PointCloud, epsilon: float) -> np.ndarray:
    """Centres (cloud points) of a maximal family of disjoint open eps-balls."""
    if epsilon <= 0:
        raise InvalidMeasureError(f"epsilon must be positive, got {epsilon}")
    if cloud.dim == 1:
        x = np.sort(cloud.points[:, 0])
        centers = []
        i = 0
        while i < x.size:
            centers.append(x[i])
            i = int(np.searchsorted(x, x[i] + 2 * epsilon, side="left"))
        return np.array(centers).reshape(-1, 1)
    return _farthest_point_centers(cloud.points, lambda reach: reach < 2 * epsilon)


def _farthest_point_centers(points: np.ndarray, done: Callable[[float], bool]) -> np.ndarray:
    # Farthest-point traversal from the first point; ties go to the lowest index.
    chosen = [0]
    reach = np.linalg.norm(points - points[0], axis=1)
    while True:
        j = int(np.argmax(reach))
        if done(float(reach[j])):
            break
        chosen.append(j)
        reach = np.minimum(reach, np.linalg.norm(points - points[j], axis=1))
    return points[chosen]


def covering_number(cloud: PointCloud, epsilon: float) -> int:
    return int(covering_centers(cloud, epsilon).shape[0])


def packing_number(cloud: PointCloud, epsilon: float) -> int:
    return int(packing_centers(cloud, epsilon).shape[0])


def minkowski_content(cloud: PointCloud, alpha: float, epsilons: Sequence[float],
                      grid_fraction: float = DEFAULT_GRID_FRACTION, threads: int = 1) -> ContentEstimate:
    """Values (2 eps)^(alpha - n) |A(eps)| along a decreasing eps sequence.

    Raises:
        ResolutionError: If some eps is not above the cloud's smallest point gap
    """
    n = cloud.dim
    if not 0.0 <= alpha <= n:
        raise InvalidMeasureError(f"alpha must lie in [0, {n}], got {alpha}")
    eps = np.asarray(epsilons, dtype=float).reshape(-1)
    if eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise InvalidMeasureError("epsilons must be positive and strictly decreasing")
    resolution = cloud_resolution(cloud)
    if eps[-1] <= resolution:
        raise ResolutionError(
            f"epsilon {eps[-1]:g} is below the cloud resolution {resolution:g}; refine the cloud or stop earlier"
        )

    volumes = ordered_map(lambda e: neighborhood_volume(cloud, e, e * grid_fraction), eps, threads)
    values = (2 * eps) ** (alpha - n) * np.asarray(volumes)
    logger.debug("minkowski content over %d scales, last value %.6g", eps.size, values[-1])
    return ContentEstimate(eps, values, alpha)


def truncation_mass(measure: AtomicMeasure, x: Sequence[float]) -> float:
    """mu(E_x): total weight of atoms a with a_j <= x_j in every coordinate."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (measure.dim,):
        raise InvalidMeasureError(f"corner must be a {measure.dim}-vector")
    mask = np.all(measure.locations <= x, axis=1)
    return float(np.sum(measure.weights.real[mask]))


def truncation_masses_at_atoms(measure: AtomicMeasure, chunk: int = 512) -> np.ndarray:
    """mu(E_a) for every atom a, in atom order."""
    weights = measure.weights.real
    locations = measure.locations
    if measure.dim == 1:
        x = locations[:, 0]
        order = np.argsort(x, kind="stable")
        cumulative = np.cumsum(weights[order])
        # last position holding a value <= x_i, so coincident atoms share one mass
        idx = np.searchsorted(x[order], x, side="right") - 1
        return cumulative[idx]

    masses = np.empty(measure.size)
    for start in range(0, measure.size, chunk):
        block = locations[start:start + chunk]
        dominated = np.all(locations[None, :, :] <= block[:, None, :], axis=2)
        masses[start:start + chunk] = np.sum(np.where(dominated, weights[None, :], 0.0), axis=1)
    return masses


def cell_content_ratios(cloud: PointCloud, weights: np.ndarray, alpha: float, cell: float,
                        epsilons: Sequence[float]) -> np.ndarray:
    """Upper Minkowski estimate of each non-empty grid cell S divided by mu(S).

    Only the axis-aligned cells of side `cell` are examined, and only the scales
    below `cell` and above the resolution of the points in that cell. A cell with
    no such scale is left out. Cells are returned in lexicographic order of their
    index.
    """
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.shape[0] != len(cloud):
        raise InvalidMeasureError("one weight per cloud point is required")
    eps = np.asarray(epsilons, dtype=float)
    eps = eps[eps < cell]
    if eps.size == 0:
        raise ResolutionError(f"no epsilon below the cell size {cell:g}")

    keys = np.floor(cloud.points / cell).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    ratios = []
    for label in range(int(inverse.max()) + 1):
        members = inverse == label
        mass = float(weights[members].sum())
        if mass <= 0:
            continue
        sub = PointCloud(cloud.points[members])
        usable = eps[eps > cloud_resolution(sub)]
        if usable.size == 0:
            logger.debug("cell %d skipped: no scale above its resolution", label)
            continue
        ratios.append(minkowski_content(sub, alpha, usable).upper_est / mass)
    return np.array(ratios)
