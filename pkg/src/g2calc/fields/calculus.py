"""Differential calculus on structure fields: covariant derivatives, the
Levi-Civita curvature with its irreducible blocks, exterior calculus, and
Lie derivatives.

Index layout: a covariant derivative adds a new first tensor index, so
``nabla(sf, T, 2)[..., p, i, j]`` is nabla_p T_ij.  All tensor indices are
stored lower; every contraction raises explicitly through the inverse
metric.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..frame import Sym, _E, _perm_sign, hodge_star, raise_all, symmetrize, symmetry_residual, t2_trace
from ..reps import CurvLike, curvature_blocks, rho_phi
from .grid import partial_on_grid
from .structure import StructureField

__all__ = [
    "partial_tensor",
    "christoffel",
    "nabla",
    "nabla_phi",
    "nabla_psi",
    "nabla_g_residual",
    "CurvatureField",
    "curvature",
    "second_bianchi_residual",
    "ricci_identity_residual",
    "exterior_derivative",
    "codifferential",
    "curl",
    "lie_derivative_metric",
    "lie_derivative_phi",
]


def partial_tensor(sf: StructureField, values: np.ndarray) -> np.ndarray:
    """Coordinate derivative with a new first tensor index: out[..., p, I] is
    the derivative of values[..., I] along coordinate p (zero off the grid
    directions)."""
    values = np.asarray(values, dtype=float)
    cols = [partial_on_grid(sf.grid, values, d) for d in range(7)]
    return np.stack(cols, axis=len(sf.grid.shape))


def christoffel(sf: StructureField) -> np.ndarray:
    """Levi-Civita symbols gamma[..., i, j, k] = Gamma^k_ij of the induced
    metric, from fourth-order differences of g."""

    def build():
        dg = partial_tensor(sf, sf.g)
        term = dg + _E("...jil->...ijl", dg) - _E("...lij->...ijl", dg)
        return 0.5 * _E("...kl,...ijl->...ijk", sf.ginv, term)

    return sf.cached("christoffel", build)


def nabla(sf: StructureField, values: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Covariant derivative of a rank-k tensor field (all indices lower)."""
    values = np.asarray(values, dtype=float)
    nb = len(sf.grid.shape)
    if rank is None:
        rank = values.ndim - nb
    if rank < 0 or values.shape[nb:] != (7,) * rank:
        raise ValueError(f"values of shape {values.shape} is not a rank-{rank} field")
    out = partial_tensor(sf, values)
    if rank == 0:
        return out
    gam = christoffel(sf)
    idx = "abcdef"[:rank]
    for s in range(rank):
        src = idx[:s] + "m" + idx[s + 1 :]
        out = out - _E(f"...p{idx[s]}m,...{src}->...p{idx}", gam, values)
    return out


def nabla_phi(sf: StructureField) -> np.ndarray:
    return sf.cached("nabla_phi", lambda: nabla(sf, sf.phi, 3))


def nabla_psi(sf: StructureField) -> np.ndarray:
    return sf.cached("nabla_psi", lambda: nabla(sf, sf.psi, 4))


def nabla_g_residual(sf: StructureField) -> float:
    """Max-abs of nabla g; pure discretization error for the Levi-Civita
    connection, O(h^4)."""
    return float(np.abs(nabla(sf, sf.g, 2)).max())


# ---------------------------------------------------------------------------
# curvature


@dataclass
class CurvatureField:
    """Levi-Civita curvature data of a structure field.

    ``riemann`` is the finite-difference curvature projected onto
    S^2(Lambda^2); ``pair_residual`` records the pre-projection symmetry
    defect and ``riemann.bianchi_residual`` the first-Bianchi defect, both
    pure discretization error.  Blocks are computed from the exactly
    Bianchi-projected tensor.
    """

    sf: StructureField
    riemann: CurvLike
    pair_residual: float
    _derived: dict = field(default_factory=dict, repr=False)

    def _get(self, key, builder):
        if key not in self._derived:
            self._derived[key] = builder()
        return self._derived[key]

    @property
    def ricci(self) -> np.ndarray:
        return self._get(
            "ricci",
            lambda: _E("...ljkm,...lm->...jk", self.riemann.data, self.sf.ginv),
        )

    @property
    def scalar(self) -> np.ndarray:
        return self._get("scalar", lambda: t2_trace(self.ricci, self.sf.ginv))

    @property
    def fmap(self) -> np.ndarray:
        """F = rho_phi of the curvature; tr F = -2R."""
        return self._get("fmap", lambda: rho_phi(self.riemann, self.sf.fp))

    @property
    def bianchi_projected(self) -> CurvLike:
        """Curvature with its Lambda^4 component removed, so the first
        Bianchi identity holds exactly."""
        return self._get(
            "bianchi_projected",
            lambda: CurvLike(
                self.riemann.data - symmetrize(self.riemann.data, Sym.ALT4)
            ),
        )

    @property
    def blocks(self):
        return self._get(
            "blocks", lambda: curvature_blocks(self.bianchi_projected, self.sf.fp)
        )


def curvature(sf: StructureField) -> CurvatureField:
    """Curvature of the induced metric by fourth-order differencing of the
    Christoffel field."""

    def build():
        gam = christoffel(sf)
        dgam = partial_tensor(sf, gam)
        rmix = dgam - _E("...jikm->...ijkm", dgam)
        rmix += _E("...ipm,...jkp->...ijkm", gam, gam)
        rmix -= _E("...jpm,...ikp->...ijkm", gam, gam)
        rm_raw = _E("...ijkm,...ml->...ijkl", rmix, sf.g)
        return CurvatureField(
            sf=sf,
            riemann=CurvLike(rm_raw),
            pair_residual=symmetry_residual(rm_raw, Sym.CURVPAIR),
        )

    return sf.cached("curvature", build)


def second_bianchi_residual(sf: StructureField) -> float:
    """Max-abs of div Ric - (1/2) grad R, the twice-contracted second
    Bianchi identity; pure discretization error."""
    cf = curvature(sf)
    dric = nabla(sf, cf.ricci, 2)
    div_ric = _E("...pik,...pi->...k", dric, sf.ginv)
    dr = partial_tensor(sf, cf.scalar)
    return float(np.abs(div_ric - 0.5 * dr).max())


def ricci_identity_residual(sf: StructureField, w: np.ndarray) -> float:
    """Residual of the commutator identity
    (nabla_p nabla_q - nabla_q nabla_p) W_i + R_pqi{}^m W_m = 0
    for a covector field W; pure discretization error."""
    ddw = nabla(sf, nabla(sf, w, 1), 2)
    comm = ddw - _E("...qpi->...pqi", ddw)
    rm = curvature(sf).riemann.data
    corr = _E("...pqim,...mn,...n->...pqi", rm, sf.ginv, w)
    return float(np.abs(comm + corr).max())


# ---------------------------------------------------------------------------
# exterior calculus


def _alt_project(arr: np.ndarray, k: int) -> np.ndarray:
    if k <= 1:
        return arr
    if k <= 4:
        return symmetrize(arr, {2: Sym.ALT2, 3: Sym.ALT3, 4: Sym.ALT4}[k])
    nb = arr.ndim - k
    out = np.zeros_like(arr)
    batch = list(range(nb))
    for p in itertools.permutations(range(k)):
        out += _perm_sign(p) * np.transpose(arr, batch + [nb + q for q in p])
    return out / math.factorial(k)


def exterior_derivative(sf: StructureField, form: np.ndarray, k: int | None = None) -> np.ndarray:
    """d of a k-form field by antisymmetrised coordinate differences; no
    connection enters."""
    form = np.asarray(form, dtype=float)
    nb = len(sf.grid.shape)
    if k is None:
        k = form.ndim - nb
    if k >= 7:
        raise ValueError("cannot take d of a 7-form")
    raw = partial_tensor(sf, form)
    return (k + 1) * _alt_project(raw, k + 1)


def codifferential(sf: StructureField, form: np.ndarray, k: int | None = None) -> np.ndarray:
    """d^* of a k-form field through the star route (-1)^k star d star.

    The inner d is fused with the outer star: contracting the raw coordinate
    derivative against the Levi-Civita symbol antisymmetrises it for free,
    so the (8-k)-index intermediate is never alternated explicitly.
    """
    form = np.asarray(form, dtype=float)
    nb = len(sf.grid.shape)
    if k is None:
        k = form.ndim - nb
    if k == 0:
        return np.zeros(sf.grid.shape)
    m = 8 - k
    s = hodge_star(form, sf.fp, k)
    ds_raw = partial_tensor(sf, s)
    return (-1.0) ** k * m * hodge_star(ds_raw, sf.fp, m)


def curl(sf: StructureField, w: np.ndarray) -> np.ndarray:
    """(curl W)_k = nabla_i W_j phi^{ij}{}_k for a covector field W."""
    dw = nabla(sf, w, 1)
    return _E("...ij,...ia,...jb,...abk->...k", dw, sf.ginv, sf.ginv, sf.phi)


def lie_derivative_metric(sf: StructureField, w: np.ndarray) -> np.ndarray:
    """(L_W g)_ij = nabla_i W_j + nabla_j W_i for a covector field W."""
    dw = nabla(sf, w, 1)
    return dw + np.swapaxes(dw, -1, -2)


def lie_derivative_phi(sf: StructureField, w: np.ndarray) -> np.ndarray:
    """Lie derivative of phi along the vector field with covector W, by the
    connection-free coordinate formula."""
    wup = _E("...p,...pq->...q", np.asarray(w, dtype=float), sf.ginv)
    dphi = partial_tensor(sf, sf.phi)
    dwup = partial_tensor(sf, wup)
    out = _E("...p,...pijk->...ijk", wup, dphi)
    out += _E("...ip,...pjk->...ijk", dwup, sf.phi)
    out += _E("...jp,...ipk->...ijk", dwup, sf.phi)
    out += _E("...kp,...ijp->...ijk", dwup, sf.phi)
    return out
