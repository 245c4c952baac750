"""Seeded generators for structure fields on periodic grids."""
from __future__ import annotations

import numpy as np

from ..frame import PHI0, _E, _expm
from .grid import TWO_PI, GridSpec
from .structure import StructureField

__all__ = ["generate_field", "fourier_scalar", "fourier_matrix"]

KINDS = ("flat", "gauge_deform", "conformal", "custom")


def _mode_table(rng: np.random.Generator, naxes: int, nmodes: int, max_wave: int) -> tuple:
    """Draw integer wavevectors (never all zero), amplitudes and phases."""
    waves = np.zeros((nmodes, naxes), dtype=int)
    for m in range(nmodes):
        while True:
            k = rng.integers(-max_wave, max_wave + 1, size=naxes)
            if np.any(k != 0):
                waves[m] = k
                break
    coeff = rng.standard_normal(nmodes) / (1.0 + np.sum(waves**2, axis=1))
    phase = rng.uniform(0.0, TWO_PI, size=nmodes)
    return waves, coeff, phase


def fourier_scalar(
    grid: GridSpec, rng: np.random.Generator, nmodes: int = 3, max_wave: int = 2
) -> np.ndarray:
    """A smooth periodic scalar field with max-abs at most one.

    The normalisation divides by the coefficient sum, not by the sampled
    peak, so the same seed describes the same smooth function on every
    refinement of the grid.
    """
    waves, coeff, phase = _mode_table(rng, grid.naxes, nmodes, max_wave)
    coeff = coeff / float(np.sum(np.abs(coeff)))
    coords = grid.coords()
    theta = [TWO_PI * x / p for x, p in zip(coords, grid.periods)]
    f = np.zeros(grid.shape)
    for k, c, d in zip(waves, coeff, phase):
        arg = sum(int(ki) * th for ki, th in zip(k, theta))
        f += c * np.cos(arg + d)
    return f


def fourier_matrix(
    grid: GridSpec, rng: np.random.Generator, nmodes: int = 3, max_wave: int = 2
) -> np.ndarray:
    """A smooth periodic 7x7 matrix field, every entry bounded by one and
    refinement-stable for a fixed seed."""
    a = np.empty(grid.shape + (7, 7))
    for i in range(7):
        for j in range(7):
            a[..., i, j] = fourier_scalar(grid, rng, nmodes, max_wave)
    return a


def _flat_phi(grid: GridSpec) -> np.ndarray:
    return np.broadcast_to(PHI0, grid.shape + (7, 7, 7)).copy()


def generate_field(
    kind: str,
    params: dict | None,
    grid: GridSpec,
    seed: int = 0,
) -> StructureField:
    """Build a seeded structure field.

    flat: the constant flat model.
    gauge_deform: pointwise pullback of the flat form by exp(s A(x)) with A a
        seeded smooth periodic matrix field, entries bounded by one, and
        s = params["amplitude"]; the exponential stays in the identity
        component so the result is positive for every s.
    conformal: exp(3 f(x)) times the flat form, f a seeded smooth periodic
        scalar scaled to max-abs params["amplitude"].
    custom: params["phi"] gives the 3-form field directly, or
        params["builder"](coords) computes it from the coordinate arrays.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "flat":
        phi = _flat_phi(grid)
    elif kind == "gauge_deform":
        amp = float(params.get("amplitude", 0.05))
        nmodes = int(params.get("modes", 3))
        max_wave = int(params.get("max_wave", 2))
        a = fourier_matrix(grid, rng, nmodes, max_wave)
        m = _expm(amp * a)
        phi = _E("...abc,...ai,...bj,...ck->...ijk", _flat_phi(grid), m, m, m)
    elif kind == "conformal":
        amp = float(params.get("amplitude", 0.05))
        nmodes = int(params.get("modes", 2))
        max_wave = int(params.get("max_wave", 2))
        f = amp * fourier_scalar(grid, rng, nmodes, max_wave)
        phi = np.exp(3.0 * f)[..., None, None, None] * _flat_phi(grid)
    elif kind == "custom":
        if "phi" in params:
            phi = np.asarray(params["phi"], dtype=float)
        elif "builder" in params:
            phi = np.asarray(params["builder"](grid.coords()), dtype=float)
        else:
            raise ValueError("custom generation needs params['phi'] or params['builder']")
    else:
        raise ValueError(f"unknown field kind {kind!r}; expected one of {KINDS}")
    meta = {
        "kind": kind,
        "seed": int(seed),
        "params": {k: v for k, v in params.items() if k not in ("phi", "builder")},
    }
    return StructureField(grid, phi, meta=meta)
