from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from src.core.errors import InvalidMeasureError


def tail_window(size: int, fraction: float) -> slice:
    """Slice selecting the last `fraction` of a sequence (never empty)."""
    count = max(1, int(np.ceil(size * fraction)))
    return slice(size - count, size)


@dataclass(frozen=True, eq=False)
class AsymptoticSeries:
    """Values of a normalised functional along a growing L-grid.

    liminf_est / limsup_est are band proxies: min / max over the last half of the
    grid. They are observable surrogates, not limits.
    """

    exponent_k: float
    p: float
    L_values: np.ndarray
    values: np.ndarray
    name: str = "ball_average"
    liminf_est: float = field(init=False)
    limsup_est: float = field(init=False)

    TAIL_FRACTION = 0.5

    def __post_init__(self):
        L_values = np.array(self.L_values, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if L_values.shape != values.shape or L_values.size == 0:
            raise InvalidMeasureError("a series needs one value per L and at least one point")
        if np.any(np.diff(L_values) <= 0):
            raise InvalidMeasureError("L_values must be strictly increasing")
        if np.any(L_values <= 0):
            raise InvalidMeasureError("L_values must be positive")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidMeasureError("series values must be finite and nonnegative")
        L_values.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "L_values", L_values)
        object.__setattr__(self, "values", values)
        tail = values[tail_window(values.size, self.TAIL_FRACTION)]
        object.__setattr__(self, "liminf_est", float(tail.min()))
        object.__setattr__(self, "limsup_est", float(tail.max()))

    @property
    def band_ratio(self) -> float:
        if self.liminf_est <= 0:
            return float("inf")
        return self.limsup_est / self.liminf_est

    def running_tail_bands(self) -> Tuple[np.ndarray, np.ndarray]:
        """Band of the last half of every grid prefix, as the grid grows."""
        lows = np.empty_like(self.values)
        highs = np.empty_like(self.values)
        for i in range(self.values.size):
            tail = self.values[: i + 1][tail_window(i + 1, self.TAIL_FRACTION)]
            lows[i] = tail.min()
            highs[i] = tail.max()
        return lows, highs

    def powered(self, exponent: float, name: str = "") -> "AsymptoticSeries":
        return AsymptoticSeries(self.exponent_k, self.p, self.L_values, self.values ** exponent,
                                name or f"{self.name}^{exponent:g}")

    def rescaled_exponent(self, new_k: float) -> "AsymptoticSeries":
        """Same integrals normalised by L^new_k instead of L^exponent_k."""
        factor = self.L_values ** (self.exponent_k - new_k)
        return AsymptoticSeries(new_k, self.p, self.L_values, self.values * factor, self.name)

    def rows(self) -> List[Tuple[float, float, float, float]]:
        lows, highs = self.running_tail_bands()
        return list(zip(self.L_values, self.values, lows, highs))


@dataclass(frozen=True, eq=False)
class ContentEstimate:
    """Minkowski-content values (2 eps)^(alpha - n) |A(eps)| along decreasing eps."""

    epsilons: np.ndarray
    values: np.ndarray
    alpha: float
    upper_est: float = field(init=False)
    lower_est: float = field(init=False)

    TAIL_FRACTION = 0.25

    def __post_init__(self):
        epsilons = np.array(self.epsilons, dtype=float).reshape(-1)
        values = np.array(self.values, dtype=float).reshape(-1)
        if epsilons.shape != values.shape or epsilons.size == 0:
            raise InvalidMeasureError("one content value per epsilon is required")
        tail = values[tail_window(values.size, self.TAIL_FRACTION)]
        object.__setattr__(self, "epsilons", epsilons)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "upper_est", float(tail.max()))
        object.__setattr__(self, "lower_est", float(tail.min()))

    @property
    def spread_ratio(self) -> float:
        """max/min over every computed scale."""
        return float(self.values.max() / self.values.min())


def dyadic_grid(base: float, start: int, count: int) -> np.ndarray:
    return float(base) ** np.arange(start, start + count, dtype=float)


def epsilon_grid(base: float, start: int, count: int) -> np.ndarray:
    return float(base) ** -np.arange(start, start + count, dtype=float)


def as_grid(values: Sequence[float]) -> np.ndarray:
    return np.asarray(values, dtype=float).reshape(-1)
