"""Data-driven reduced order models for the spectral Schrodinger problem,
spectrally matched grids, and internal-solution inversion."""

from . import (
    config,
    errors,
    forward1d,
    forward2d,
    geometry,
    grid1d,
    harness,
    internal,
    lanczos,
    loewner,
)

__all__ = [
    "config",
    "errors",
    "forward1d",
    "forward2d",
    "geometry",
    "grid1d",
    "harness",
    "internal",
    "lanczos",
    "loewner",
]
