"""Radial and spherical quadrature shared by the mollifier and asymptotic engines."""

import logging
from typing import Tuple

import numpy as np
from scipy.integrate import simpson

from src.core.errors import QuadratureBudgetError, UnsupportedDimensionError
from src.models.settings import QuadratureSettings

logger = logging.getLogger(__name__)

GEOMETRIC_LEVELS = 6


def sphere_nodes(n: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Directions and weights integrating over S^(n-1).

    n = 1 uses the counting measure on {+1, -1}; n = 2 the trapezoid rule on
    `order` equispaced angles with weights 2 pi / order.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if n == 2:
        theta = 2.0 * np.pi * np.arange(order) / order
        return np.column_stack([np.cos(theta), np.sin(theta)]), np.full(order, 2.0 * np.pi / order)
    raise UnsupportedDimensionError(f"spherical quadrature supports n in {{1, 2}}, got n = {n}")


def radial_nodes(upper: float, spread: float, settings: QuadratureSettings,
                 directions: int = 1, min_wavelength: float = np.inf) -> np.ndarray:
    """Geometric-then-uniform nodes on [0, upper].

    The uniform part puts samples_per_wavelength nodes on every oscillation of
    period 2 pi / spread (or min_wavelength, if shorter) and never uses fewer
    than radial_samples intervals. The first interval is refined geometrically
    towards the origin.

    Raises:
        QuadratureBudgetError: If nodes times directions exceeds sample_cap
    """
    wavelength = min(2.0 * np.pi / spread if spread > 0 else np.inf, min_wavelength)
    intervals = settings.radial_samples
    if np.isfinite(wavelength):
        intervals = max(intervals, int(np.ceil(upper * settings.samples_per_wavelength / wavelength)))
    intervals += intervals % 2
    total = (intervals + 1 + GEOMETRIC_LEVELS) * directions
    if total > settings.sample_cap:
        raise QuadratureBudgetError(
            f"radial quadrature up to {upper:g} needs {total} samples, over the cap of {settings.sample_cap}"
        )
    uniform = np.linspace(0.0, upper, intervals + 1)
    geometric = uniform[1] * 2.0 ** -np.arange(GEOMETRIC_LEVELS, 0, -1)
    return np.concatenate([uniform[:1], geometric, uniform[1:]])


def radial_integral(values: np.ndarray, nodes: np.ndarray) -> float:
    """Composite Simpson rule over (possibly non-uniform) radial nodes."""
    return float(simpson(values, x=nodes))
