from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import InvalidMeasureError
from src.models.similitude import Similitude

WEIGHT_SUM_TOL = 1e-12
MORAN_TOL = 1e-10
BOX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IFSMeasure:
    """Self-similar probability measure of a finite iterated function system.

    Attributes:
        maps: The similitudes S_1..S_m (m >= 2), all in the same dimension
        weights: Probabilities p_j attached to the maps (equal when omitted)
        bounding_box: (lower, upper) corners of a box every map sends into itself
        osc_asserted: User assertion that the open set condition holds (never verified)
        dimension_alpha: Similarity dimension solving sum_j ratio_j^alpha = 1
    """

    maps: Tuple[Similitude, ...]
    weights: np.ndarray
    bounding_box: Tuple[np.ndarray, np.ndarray]
    osc_asserted: bool = False
    name: str = "ifs"
    dimension_alpha: float = field(init=False)

    def __post_init__(self):
        from src.analysis.measures import similarity_dimension

        maps = tuple(self.maps)
        if len(maps) < 2:
            raise InvalidMeasureError("an IFS needs at least two maps")
        dims = {s.dim for s in maps}
        if len(dims) != 1:
            raise InvalidMeasureError(f"maps live in different dimensions: {sorted(dims)}")

        weights = np.array(self.weights, dtype=float)
        if weights.shape != (len(maps),):
            raise InvalidMeasureError(
                f"expected {len(maps)} weights, got {weights.shape[0] if weights.ndim else 0}"
            )
        if np.any(weights <= 0):
            raise InvalidMeasureError("IFS weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidMeasureError(f"IFS weights sum to {weights.sum()!r}, not 1")

        lower, upper = (np.array(c, dtype=float).reshape(-1) for c in self.bounding_box)
        n = dims.pop()
        if lower.shape != (n,) or upper.shape != (n,) or np.any(lower > upper):
            raise InvalidMeasureError("bounding_box must be (lower, upper) corners in the maps' dimension")

        for a in (weights, lower, upper):
            a.setflags(write=False)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bounding_box", (lower, upper))
        self._check_box_invariance()
        object.__setattr__(self, "dimension_alpha", similarity_dimension(list(maps)))
        if self.moran_residual > MORAN_TOL:
            raise InvalidMeasureError(f"Moran residual {self.moran_residual:.3g} exceeds {MORAN_TOL}")

    @classmethod
    def from_maps(cls, maps: Sequence[Similitude], bounding_box: Tuple[Sequence[float], Sequence[float]],
                  weights: Optional[Sequence[float]] = None, osc_asserted: bool = False,
                  name: str = "ifs") -> "IFSMeasure":
        if weights is None:
            weights = np.full(len(maps), 1.0 / len(maps))
        return cls(tuple(maps), np.asarray(weights, dtype=float),
                   (np.asarray(bounding_box[0]), np.asarray(bounding_box[1])), osc_asserted, name)

    def _check_box_invariance(self) -> None:
        lower, upper = self.bounding_box
        corners = np.array(list(product(*zip(lower, upper))), dtype=float)
        for j, s in enumerate(self.maps):
            image = s.apply(corners)
            if np.any(image < lower - BOX_TOL) or np.any(image > upper + BOX_TOL):
                raise InvalidMeasureError(f"map {j + 1} does not send the bounding box into itself")

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def ratios(self) -> np.ndarray:
        return np.array([s.ratio for s in self.maps])

    @property
    def box_corners(self) -> np.ndarray:
        lower, upper = self.bounding_box
        return np.array(list(product(*zip(lower, upper))), dtype=float)

    @property
    def box_diameter(self) -> float:
        lower, upper = self.bounding_box
        return float(np.linalg.norm(upper - lower))

    @property
    def moran_residual(self) -> float:
        return float(abs(np.sum(self.ratios ** self.dimension_alpha) - 1.0))

    def base_point(self) -> np.ndarray:
        return self.maps[0].fixed_point()

    def describe(self) -> List[str]:
        return [f"measure = {self.name} (self-similar, n={self.dim}, m={len(self.maps)})",
                f"alpha = {self.dimension_alpha:.15g}",
                f"osc_asserted = {self.osc_asserted}"]
