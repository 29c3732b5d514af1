from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.core.errors import InvalidMeasureError


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite sum of point masses: sum_k c_k delta(x - a_k).

    Locations are stored as an (N, n) array and weights as complex numbers, so the
    same type models probability discretisations and the complex coefficient
    sequences of trigonometric sums.
    """

    locations: np.ndarray
    weights: np.ndarray
    total_mass: complex = field(init=False)

    def __post_init__(self):
        locations = np.array(self.locations, dtype=float)
        if locations.ndim == 1:
            locations = locations.reshape(-1, 1)
        weights = np.array(self.weights, dtype=complex).reshape(-1)
        if locations.ndim != 2 or locations.shape[0] == 0:
            raise InvalidMeasureError("an atomic measure needs at least one atom")
        if weights.shape[0] != locations.shape[0]:
            raise InvalidMeasureError(
                f"{locations.shape[0]} locations but {weights.shape[0]} weights"
            )
        if not np.all(np.isfinite(locations)):
            raise InvalidMeasureError("atom locations must be finite")
        if not np.all(np.isfinite(weights)):
            raise InvalidMeasureError("atom weights must be finite")
        locations.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "total_mass", complex(weights.sum()))

    @classmethod
    def on_line(cls, positions: Sequence[float], weights: Sequence[complex]) -> "AtomicMeasure":
        return cls(np.asarray(positions, dtype=float).reshape(-1, 1), np.asarray(weights))

    @classmethod
    def unit_atom(cls, location: Sequence[float]) -> "AtomicMeasure":
        location = np.atleast_1d(np.asarray(location, dtype=float))
        return cls(location.reshape(1, -1), np.array([1.0 + 0j]))

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    @property
    def size(self) -> int:
        return self.locations.shape[0]

    @property
    def is_real_nonnegative(self) -> bool:
        return bool(np.all(self.weights.imag == 0) and np.all(self.weights.real >= 0))

    @property
    def spread(self) -> float:
        """Diagonal of the atoms' bounding box (an upper bound for their diameter)."""
        return float(np.linalg.norm(self.locations.max(axis=0) - self.locations.min(axis=0)))

    def scaled(self, factor: complex) -> "AtomicMeasure":
        return AtomicMeasure(self.locations, self.weights * factor)

    def pushforward(self, similitude, weight_factor: float = 1.0) -> "AtomicMeasure":
        return AtomicMeasure(similitude.apply(self.locations), self.weights * weight_factor)


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """An atomic measure carrying one density sample per atom, modelling f dmu."""

    base: AtomicMeasure
    density: np.ndarray

    def __post_init__(self):
        density = np.array(self.density, dtype=float).reshape(-1)
        if density.shape[0] != self.base.size:
            raise InvalidMeasureError(
                f"density has {density.shape[0]} samples for {self.base.size} atoms"
            )
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise InvalidMeasureError("density samples must be finite and nonnegative")
        density.setflags(write=False)
        object.__setattr__(self, "density", density)

    @classmethod
    def uniform(cls, base: AtomicMeasure, value: float = 1.0) -> "WeightedMeasure":
        return cls(base, np.full(base.size, float(value)))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def effective_weights(self) -> np.ndarray:
        """Weights of the product measure f dmu."""
        return self.density * self.base.weights

    def as_atomic(self) -> AtomicMeasure:
        return AtomicMeasure(self.base.locations, self.effective_weights)

    def l2_mass(self) -> float:
        """The integral of |f|^2 dmu."""
        return float(np.sum(self.density ** 2 * self.base.weights.real))

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.effective_weights)))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite proxy of a bounded set A in R^n."""

    points: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] == 0:
            raise InvalidMeasureError("a point cloud must be nonempty")
        if not np.all(np.isfinite(points)):
            raise InvalidMeasureError("point cloud coordinates must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dim", points.shape[1])

    @classmethod
    def from_measure(cls, measure: AtomicMeasure) -> "PointCloud":
        return cls(measure.locations)

    def scaled(self, factor: float) -> "PointCloud":
        return PointCloud(self.points * factor)

    def __len__(self) -> int:
        return self.points.shape[0]
