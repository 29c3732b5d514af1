"""The smooth bump chi = C exp(-1 / (1 - |x|^2)) on the unit ball, with unit integral.

Its transform is radial, so it is tabulated once per dimension by
Gauss-Legendre quadrature and interpolated with a cubic spline.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import j0

from src.core.errors import UnsupportedDimensionError

GAUSS_NODES = 400
TABLE_MAX = 600.0
TABLE_SIZE = 8193


def _profile(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _legendre() -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _sphere_area(n: int) -> float:
    if n == 1:
        return 2.0
    if n == 2:
        return 2.0 * np.pi
    raise UnsupportedDimensionError(f"the mollifier is tabulated for n in {{1, 2}}, got n = {n}")


@lru_cache(maxsize=None)
def normalisation(n: int) -> float:
    """The constant C giving chi unit integral over R^n."""
    r, w = _legendre()
    return 1.0 / (_sphere_area(n) * float(np.sum(w * _profile(r) * r ** (n - 1))))


@lru_cache(maxsize=None)
def l2_norm_squared(n: int) -> float:
    """||chi||_2^2 by quadrature in space."""
    r, w = _legendre()
    c = normalisation(n)
    return c * c * _sphere_area(n) * float(np.sum(w * _profile(r) ** 2 * r ** (n - 1)))


def transform_direct(n: int, s: np.ndarray) -> np.ndarray:
    """chi^(s) at radial frequencies s, straight from the quadrature rule."""
    r, w = _legendre()
    s = np.atleast_1d(np.asarray(s, dtype=float))
    weighted = w * _profile(r) * normalisation(n) * _sphere_area(n)
    if n == 1:
        kernel = np.cos(np.outer(s, r))
    else:
        kernel = j0(np.outer(s, r)) * r
    return np.sum(kernel * weighted, axis=1)


@lru_cache(maxsize=None)
def _table(n: int) -> CubicSpline:
    s = np.linspace(0.0, TABLE_MAX, TABLE_SIZE)
    return CubicSpline(s, transform_direct(n, s))


def transform(n: int, s: np.ndarray) -> np.ndarray:
    """chi^(s) for radial frequencies s >= 0 (zero beyond the table)."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    inside = s <= TABLE_MAX
    out[inside] = _table(n)(s[inside])
    return out


@lru_cache(maxsize=None)
def cutoff(n: int, cut: float) -> float:
    """Radial frequency beyond which |chi^| stays below `cut` on the table."""
    s = np.linspace(0.0, TABLE_MAX, TABLE_SIZE)
    above = np.nonzero(np.abs(_table(n)(s)) >= cut)[0]
    if above.size == 0:
        return s[1]
    return float(min(TABLE_MAX, s[above[-1]] + (s[1] - s[0])))
