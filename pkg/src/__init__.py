"""Fractal-measure Fourier asymptotics lab."""

__version__ = "1.0.0"
