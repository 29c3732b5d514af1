from dataclasses import dataclass

import numpy as np

from src.core.errors import ConfigError

DEFAULT_ATOM_BUDGET = 2 ** 24


@dataclass(frozen=True)
class QuadratureSettings:
    """Numerical knobs shared by the transform, asymptotic and Hardy engines.

    Attributes:
        tol: Truncation tolerance of the self-similar transform recursion
        max_depth: Recursion depth limit of the self-similar transform
        radial_samples: Minimum number of radial Simpson intervals (>= 64)
        samples_per_wavelength: Radial samples per oscillation 2*pi/spread of |u^|^p
        angular_order: Trapezoid nodes on the circle for n = 2 spherical averages
        beat_samples: Samples per shortest beat period in Besicovitch quadrature
        gaussian_cutoff: Gaussian averages are truncated at |xi| = cutoff * L
        mollifier_cut: |chi^| level below which the mollified L2 integral is truncated
        sample_cap: Largest number of quadrature nodes a single integral may use
        atom_budget: Largest atom count cylinder_approx may build
    """

    tol: float = 1e-12
    max_depth: int = 200
    radial_samples: int = 256
    samples_per_wavelength: int = 32
    angular_order: int = 64
    beat_samples: int = 16
    gaussian_cutoff: float = 6.0
    mollifier_cut: float = 1e-8
    sample_cap: int = 2 ** 24
    atom_budget: int = DEFAULT_ATOM_BUDGET

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigError("quadrature tol must be positive")
        if self.max_depth < 1:
            raise ConfigError("quadrature max_depth must be at least 1")
        if self.radial_samples < 64:
            raise ConfigError("radial_samples must be at least 64")
        if self.samples_per_wavelength < 8:
            raise ConfigError("samples_per_wavelength must be at least 8")
        if self.beat_samples < 8:
            raise ConfigError("beat_samples must be at least 8")
        if self.angular_order < 4:
            raise ConfigError("angular_order must be at least 4")


@dataclass(frozen=True, eq=False)
class TransformRequest:
    """One frequency at which a self-similar transform is evaluated."""

    xi: np.ndarray
    tol: float = 1e-12
    max_depth: int = 200

    def __post_init__(self):
        object.__setattr__(self, "xi", np.atleast_1d(np.array(self.xi, dtype=float)))
        if self.tol <= 0:
            raise ConfigError("transform tol must be positive")
        if self.max_depth < 1:
            raise ConfigError("transform max_depth must be at least 1")
