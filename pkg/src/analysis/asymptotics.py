import dataclasses
import logging
from typing import Callable, Optional, Sequence

import numpy as np

from src.analysis.fourier import FourierHandle, transform_handle
from src.analysis.quadrature import radial_integral, radial_nodes, sphere_nodes
from src.core.errors import InvalidMeasureError, QuadratureBudgetError, UnsupportedDimensionError
from src.core.parallel import ordered_map
from src.models.atomic_measure import AtomicMeasure, WeightedMeasure
from src.models.series import AsymptoticSeries, as_grid
from src.models.settings import QuadratureSettings

logger = logging.getLogger(__name__)


def _handle(u) -> FourierHandle:
    if isinstance(u, (AtomicMeasure, WeightedMeasure)) or not callable(u):
        return transform_handle(u)
    return u


def _spherical_profile(u: FourierHandle, radii: np.ndarray, p: float, order: int) -> np.ndarray:
    """sum over directions w of weight_w |u^(r w)|^p, for every radius r."""
    directions, weights = sphere_nodes(u.dim, order)
    frequencies = (radii[:, None, None] * directions[None, :, :]).reshape(-1, u.dim)
    power = np.abs(u(frequencies)).reshape(radii.size, -1) ** p
    return np.sum(power * weights, axis=1)


def spherical_average(u, r: float, p: float = 2.0, quad_order: int = 64) -> float:
    """Integral of |u^(r w)|^p over directions w in S^(n-1).

    n = 1 gives |u^(r)|^p + |u^(-r)|^p; n = 2 the trapezoid rule on quad_order angles.

    Raises:
        UnsupportedDimensionError: For n >= 3
    """
    if r <= 0:
        raise InvalidMeasureError(f"radius must be positive, got {r}")
    return float(_spherical_profile(_handle(u), np.array([float(r)]), p, quad_order)[0])


def _with_samples(settings: Optional[QuadratureSettings], radial_samples: Optional[int]) -> QuadratureSettings:
    settings = settings or QuadratureSettings()
    if radial_samples is not None and radial_samples != settings.radial_samples:
        settings = dataclasses.replace(settings, radial_samples=radial_samples)
    return settings


def ball_average(u, L: float, p: float, k: float, radial_samples: Optional[int] = None,
                 settings: Optional[QuadratureSettings] = None) -> float:
    """L^(-k) times the integral of |u^|^p over the ball of radius L."""
    if L <= 0 or p < 1:
        raise InvalidMeasureError(f"ball average needs L > 0 and p >= 1, got L = {L}, p = {p}")
    settings = _with_samples(settings, radial_samples)
    u = _handle(u)
    nodes = radial_nodes(L, u.spread, settings, _directions(u.dim, settings))
    values = _spherical_profile(u, nodes, p, settings.angular_order) * nodes ** (u.dim - 1)
    return L ** -k * radial_integral(values, nodes)


def radial_profile_average(u, L: float, p: float, k: float,
                           settings: Optional[QuadratureSettings] = None) -> float:
    """L^(-k) times the integral over [0, L] of sigma_u(r)^(p/2) r^(n-1)."""
    if L <= 0:
        raise InvalidMeasureError(f"L must be positive, got {L}")
    settings = settings or QuadratureSettings()
    u = _handle(u)
    nodes = radial_nodes(L, u.spread, settings, _directions(u.dim, settings))
    sigma = _spherical_profile(u, nodes, 2.0, settings.angular_order)
    return L ** -k * radial_integral(sigma ** (p / 2.0) * nodes ** (u.dim - 1), nodes)


def gaussian_average(u, L: float, p: float, k: float,
                     settings: Optional[QuadratureSettings] = None) -> float:
    """L^(-k) times the integral of exp(-|xi|^2 / 2L^2) |u^|^p, truncated at gaussian_cutoff * L."""
    if L <= 0 or p < 1:
        raise InvalidMeasureError(f"gaussian average needs L > 0 and p >= 1, got L = {L}, p = {p}")
    settings = settings or QuadratureSettings()
    u = _handle(u)
    upper = settings.gaussian_cutoff * L
    nodes = radial_nodes(upper, u.spread, settings, _directions(u.dim, settings))
    profile = _spherical_profile(u, nodes, p, settings.angular_order)
    values = np.exp(-nodes ** 2 / (2.0 * L * L)) * profile * nodes ** (u.dim - 1)
    return L ** -k * radial_integral(values, nodes)


def _directions(n: int, settings: QuadratureSettings) -> int:
    return 2 if n == 1 else settings.angular_order


def _check_unit_grid(grid: np.ndarray, name: str) -> None:
    if grid.size == 0 or np.any(grid < 1):
        raise InvalidMeasureError(f"{name} needs a nonempty L-grid inside [1, inf)")


def lau_B_norm(u, alpha: float, p: float, L_grid: Sequence[float],
               settings: Optional[QuadratureSettings] = None, threads: int = 1) -> float:
    """max over the grid of (L^-(n-alpha) int_{B_L} |u^|^p)^(1/p), a lower bound for the true sup."""
    grid = as_grid(L_grid)
    _check_unit_grid(grid, "lau_B_norm")
    u = _handle(u)
    values = ordered_map(lambda L: ball_average(u, L, p, u.dim - alpha, settings=settings), grid, threads)
    return float(np.max(values)) ** (1.0 / p)


def gaussian_sup(u, alpha: float, L_grid: Sequence[float],
                 settings: Optional[QuadratureSettings] = None, threads: int = 1) -> float:
    """max over the grid of L^-(n-alpha) int exp(-|xi|^2 / 2L^2) |u^|^2."""
    grid = as_grid(L_grid)
    _check_unit_grid(grid, "gaussian_sup")
    u = _handle(u)
    values = ordered_map(lambda L: gaussian_average(u, L, 2.0, u.dim - alpha, settings), grid, threads)
    return float(np.max(values))


def _check_deltas(delta_grid: Sequence[float]) -> np.ndarray:
    deltas = as_grid(delta_grid)
    if deltas.size == 0 or np.any(deltas <= 0) or np.any(deltas > 1):
        raise InvalidMeasureError("cube half-widths must lie in (0, 1]")
    return deltas


def _cube_masses(mu: AtomicMeasure, delta: float, weights: np.ndarray, sample_cap: int):
    """Masses of Q_delta(x) on the cells of the breakpoint grid, with each cell's volume.

    An atom a lies in Q_delta(x) exactly for x in the box a + [-delta, delta)^n,
    so the mass is constant on every cell between consecutive breakpoints.
    """
    if mu.dim > 2:
        raise UnsupportedDimensionError(f"cube masses support n in {{1, 2}}, got n = {mu.dim}")
    axes = []
    for d in range(mu.dim):
        edges = np.unique(np.concatenate([mu.locations[:, d] - delta, mu.locations[:, d] + delta]))
        axes.append(edges)
    shape = tuple(edges.size for edges in axes)
    if int(np.prod(shape)) > sample_cap:
        raise QuadratureBudgetError(f"cube-mass grid needs {int(np.prod(shape))} cells, over {sample_cap}")

    jumps = np.zeros(shape, dtype=weights.dtype)
    lo = [np.searchsorted(axes[d], mu.locations[:, d] - delta) for d in range(mu.dim)]
    hi = [np.searchsorted(axes[d], mu.locations[:, d] + delta) for d in range(mu.dim)]
    if mu.dim == 1:
        np.add.at(jumps, lo[0], weights)
        np.add.at(jumps, hi[0], -weights)
        mass = np.cumsum(jumps)[:-1]
        volume = np.diff(axes[0])
    else:
        np.add.at(jumps, (lo[0], lo[1]), weights)
        np.add.at(jumps, (hi[0], lo[1]), -weights)
        np.add.at(jumps, (lo[0], hi[1]), -weights)
        np.add.at(jumps, (hi[0], hi[1]), weights)
        mass = np.cumsum(np.cumsum(jumps, axis=0), axis=1)[:-1, :-1]
        volume = np.outer(np.diff(axes[0]), np.diff(axes[1]))
    return mass, volume


def lau_M_norm(mu: AtomicMeasure, alpha: float, p: float, delta_grid: Sequence[float],
               sample_cap: int = 2 ** 24) -> float:
    """max over delta of (delta^-(n + alpha (p - 1)) int |mu(Q_delta(x))|^p dx)^(1/p).

    The x-integral is exact: an event sweep on the line, a breakpoint grid in the plane.
    """
    if p < 1:
        raise InvalidMeasureError(f"p must be at least 1, got {p}")
    n = mu.dim
    best = 0.0
    for delta in _check_deltas(delta_grid):
        mass, volume = _cube_masses(mu, delta, mu.weights, sample_cap)
        integral = float(np.sum(np.abs(mass) ** p * volume))
        best = max(best, delta ** -(n + alpha * (p - 1)) * integral)
    return best ** (1.0 / p)


def lau_M_sup_norm(mu: AtomicMeasure, alpha: float, delta_grid: Sequence[float],
                   sample_cap: int = 2 ** 24) -> float:
    """max over delta of (2 delta)^-alpha sup_x |mu|(Q_delta(x))."""
    best = 0.0
    for delta in _check_deltas(delta_grid):
        mass, _ = _cube_masses(mu, delta, np.abs(mu.weights), sample_cap)
        best = max(best, (2.0 * delta) ** -alpha * float(np.max(mass)))
    return best


class AsymptoticSweep:
    """Evaluates normalised Fourier functionals of one measure along an L-grid.

    Every L is computed independently and results come back in grid order, so
    series are identical for any thread count.
    """

    def __init__(self, u, settings: Optional[QuadratureSettings] = None, threads: int = 1,
                 progress_callback: Optional[Callable[[int, int], None]] = None) -> None:
        """
        Args:
            u: A FourierHandle or an atomic/weighted measure
            settings: Quadrature settings shared by every point of the sweep
            threads: Worker threads used across L values
            progress_callback: Optional callback function(done, total)
        """
        self.u = _handle(u)
        self.settings = settings or QuadratureSettings()
        self.threads = threads
        self.progress_callback = progress_callback

    @property
    def dim(self) -> int:
        return self.u.dim

    def _series(self, fn: Callable[[float], float], L_grid: Sequence[float], p: float, k: float,
                name: str) -> AsymptoticSeries:
        grid = as_grid(L_grid)
        logger.info("sweeping %s over %d L values (p = %g, k = %.6g)", name, grid.size, p, k)
        values = ordered_map(fn, grid, self.threads, self.progress_callback)
        return AsymptoticSeries(k, p, grid, values, name)

    def ball_series(self, L_grid: Sequence[float], p: float, k: float) -> AsymptoticSeries:
        return self._series(lambda L: ball_average(self.u, L, p, k, settings=self.settings),
                            L_grid, p, k, "ball_average")

    def gaussian_series(self, L_grid: Sequence[float], p: float, k: float) -> AsymptoticSeries:
        return self._series(lambda L: gaussian_average(self.u, L, p, k, self.settings),
                            L_grid, p, k, "gaussian_average")

    def profile_series(self, L_grid: Sequence[float], p: float, k: float) -> AsymptoticSeries:
        return self._series(lambda L: radial_profile_average(self.u, L, p, k, self.settings),
                            L_grid, p, k, "radial_profile_average")
