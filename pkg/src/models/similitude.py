from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.core.errors import InvalidMeasureError

ORTHOGONALITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Similitude:
    """Contraction x -> ratio * rotation @ x + translation."""

    ratio: float
    rotation: np.ndarray
    translation: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        rotation = np.atleast_2d(np.array(self.rotation, dtype=float))
        translation = np.atleast_1d(np.array(self.translation, dtype=float))
        if not 0.0 < self.ratio < 1.0:
            raise InvalidMeasureError(f"similitude ratio must lie in (0,1), got {self.ratio}")
        n = translation.shape[0]
        if rotation.shape != (n, n):
            raise InvalidMeasureError(
                f"rotation must be {n}x{n} to match the translation, got {rotation.shape}"
            )
        if not np.all(np.isfinite(translation)):
            raise InvalidMeasureError("translation has non-finite coordinates")
        if np.max(np.abs(rotation.T @ rotation - np.eye(n))) > ORTHOGONALITY_TOL:
            raise InvalidMeasureError("rotation is not orthogonal within 1e-12")
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)
        object.__setattr__(self, "dim", n)

    @classmethod
    def planar(cls, ratio: float, angle: float, translation: Sequence[float],
               reflect: bool = False) -> "Similitude":
        c, s = np.cos(angle), np.sin(angle)
        rotation = np.array([[c, -s], [s, c]])
        if reflect:
            rotation = rotation @ np.diag([1.0, -1.0])
        return cls(ratio, rotation, np.asarray(translation, dtype=float))

    @classmethod
    def on_line(cls, ratio: float, translation: float, reflect: bool = False) -> "Similitude":
        return cls(ratio, np.array([[-1.0 if reflect else 1.0]]), np.array([translation]))

    @property
    def linear_part(self) -> np.ndarray:
        return self.ratio * self.rotation

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map an (N, n) array of points (or a single n-vector)."""
        points = np.asarray(points, dtype=float)
        return points @ self.linear_part.T + self.translation

    def fixed_point(self) -> np.ndarray:
        # (I - sR) x = b has a unique solution because s < 1
        return np.linalg.solve(np.eye(self.dim) - self.linear_part, self.translation)
