"""Periodic sampling grids for structure fields.

A field lives on a uniform periodic grid over one to three of the seven
coordinates; it is constant in the remaining directions.  Grid axes always
lead the array layout, so a rank-k tensor field has shape
``grid.shape + (7,) * k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["GridSpec", "partial_on_grid"]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GridSpec:
    """A uniform periodic grid over a subset of the seven coordinates.

    active_dims: strictly increasing coordinate indices in 0..6 (one to
        three of them); fields are constant in the other directions.
    sizes: number of sample points along each active dimension, at least 8
        so that the fourth-order difference stencil is meaningful.
    periods: coordinate period along each active dimension (default 2 pi).
    """

    active_dims: tuple
    sizes: tuple
    periods: tuple = field(default=None)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.active_dims)
        sizes = tuple(int(n) for n in self.sizes)
        if not 1 <= len(dims) <= 3:
            raise ValueError(f"need 1 to 3 active dimensions, got {len(dims)}")
        if any(not 0 <= d <= 6 for d in dims):
            raise ValueError(f"active dimensions must lie in 0..6, got {dims}")
        if list(dims) != sorted(set(dims)):
            raise ValueError(f"active dimensions must be strictly increasing, got {dims}")
        if len(sizes) != len(dims):
            raise ValueError("sizes must match active_dims in length")
        if any(n < 8 for n in sizes):
            raise ValueError(f"each grid size must be at least 8, got {sizes}")
        periods = self.periods
        if periods is None:
            periods = (TWO_PI,) * len(dims)
        periods = tuple(float(p) for p in periods)
        if len(periods) != len(dims):
            raise ValueError("periods must match active_dims in length")
        if any(p <= 0.0 for p in periods):
            raise ValueError(f"periods must be positive, got {periods}")
        object.__setattr__(self, "active_dims", dims)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "periods", periods)

    @property
    def shape(self) -> tuple:
        return self.sizes

    @property
    def naxes(self) -> int:
        return len(self.active_dims)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def spacings(self) -> tuple:
        return tuple(p / n for p, n in zip(self.periods, self.sizes))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def axis_for(self, dim: int):
        """Grid axis carrying coordinate ``dim``, or None if inactive."""
        try:
            return self.active_dims.index(dim)
        except ValueError:
            return None

    def coords(self) -> tuple:
        """Coordinate arrays of shape ``self.shape``, one per active dim."""
        axes = [
            np.arange(n) * (p / n) for n, p in zip(self.sizes, self.periods)
        ]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def refine(self, factor: int = 2) -> "GridSpec":
        """Same domain sampled ``factor`` times as finely in every direction."""
        return GridSpec(
            active_dims=self.active_dims,
            sizes=tuple(n * factor for n in self.sizes),
            periods=self.periods,
        )

    def to_dict(self) -> dict:
        return {
            "active_dims": list(self.active_dims),
            "sizes": list(self.sizes),
            "periods": list(self.periods),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(
            active_dims=tuple(d["active_dims"]),
            sizes=tuple(d["sizes"]),
            periods=tuple(d["periods"]),
        )


def partial_on_grid(grid: GridSpec, values: np.ndarray, dim: int) -> np.ndarray:
    """Fourth-order central difference of a gridded field along coordinate
    ``dim``: (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / (12h), periodic.

    ``dim`` is one of the seven coordinate indices; an inactive one returns
    zeros since fields are constant there.
    """
    values = np.asarray(values, dtype=float)
    axis = grid.axis_for(dim)
    if axis is None:
        return np.zeros_like(values)
    h = grid.spacings[axis]
    r = np.roll
    return (
        -r(values, -2, axis=axis)
        + 8.0 * r(values, -1, axis=axis)
        - 8.0 * r(values, 1, axis=axis)
        + r(values, 2, axis=axis)
    ) / (12.0 * h)
