"""The StructureField: a positive 3-form sampled on a periodic grid, with the
full pointwise frame package and a write-once cache for derived fields."""
from __future__ import annotations

import numpy as np

from ..frame import (
    FramePoint,
    IdentityReport,
    Sym,
    identity_suite,
    metric_from_phi,
    symmetry_residual,
    t2_inner,
    tensor_inner,
)
from .grid import GridSpec

__all__ = ["StructureField"]


class StructureField:
    """A G2-structure sampled on a :class:`GridSpec`.

    ``phi`` has shape ``grid.shape + (7, 7, 7)`` and is alternating at every
    point; the induced metric, inverse, volume density and dual 4-form are
    built once at construction (raising
    :class:`~g2calc.frame.NotPositive` if any point fails positivity) and
    shared as a batched :class:`~g2calc.frame.FramePoint`.

    Derived fields (derivatives, torsion, curvature, ...) are memoised in a
    write-once cache keyed by name, so repeated queries never recompute and
    never disagree.
    """

    def __init__(self, grid: GridSpec, phi: np.ndarray, meta: dict | None = None):
        phi = np.ascontiguousarray(np.asarray(phi, dtype=float))
        want = grid.shape + (7, 7, 7)
        if phi.shape != want:
            raise ValueError(f"phi must have shape {want}, got {phi.shape}")
        scale = max(1.0, float(np.abs(phi).max()))
        res = symmetry_residual(phi, Sym.ALT3)
        if res > 1e-12 * scale:
            raise ValueError(f"phi is not alternating: residual {res:.3e}")
        # canonicalize: rebuild from the 35 independent components so the
        # stored tensor is exactly alternating and file round-trips are
        # bit-exact
        from .fieldio import components_to_phi, phi_to_components

        phi = components_to_phi(phi_to_components(phi))
        self.grid = grid
        self.phi = phi
        self.fp: FramePoint = metric_from_phi(phi)
        self.meta = dict(meta or {})
        self._cache: dict = {}
        self.phi.setflags(write=False)

    # -- cache -------------------------------------------------------------

    def cached(self, key: str, builder):
        """Return the cached value for ``key``, building it once if absent."""
        if key not in self._cache:
            value = builder()
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            self._cache[key] = value
        return self._cache[key]

    # -- frame views ---------------------------------------------------------

    @property
    def g(self) -> np.ndarray:
        return self.fp.g

    @property
    def ginv(self) -> np.ndarray:
        return self.fp.ginv

    @property
    def psi(self) -> np.ndarray:
        return self.fp.psi

    @property
    def vol(self) -> np.ndarray:
        return self.fp.vol

    @property
    def orientation(self) -> int:
        return self.fp.orientation

    def point(self, idx) -> FramePoint:
        return self.fp.point(idx)

    def min_eig_g(self) -> float:
        return float(np.linalg.eigvalsh(self.g).min())

    def identity_report(self, threshold: float = 1e-9) -> IdentityReport:
        """Run the pointwise contraction-identity audit over the whole grid."""
        return identity_suite(self.fp, threshold=threshold)

    # -- integration ---------------------------------------------------------

    def integrate(self, scalar: np.ndarray) -> float:
        """Integral of a scalar field against the Riemannian volume."""
        return float(np.sum(np.asarray(scalar) * self.vol) * self.grid.cell_volume)

    def total_volume(self) -> float:
        return self.integrate(np.ones(self.grid.shape))

    def norm2(self, field: np.ndarray, rank: int) -> float:
        """Squared L^2 norm of a rank-k tensor field (all indices lower)."""
        if rank == 0:
            dens = np.asarray(field, dtype=float) ** 2
        elif rank == 2:
            dens = t2_inner(field, field, self.ginv)
        else:
            dens = tensor_inner(field, field, self.ginv, rank)
        return self.integrate(dens)

    def with_phi(self, phi: np.ndarray, meta: dict | None = None) -> "StructureField":
        """A new field on the same grid (caches are not carried over)."""
        return StructureField(self.grid, phi, meta=self.meta if meta is None else meta)
