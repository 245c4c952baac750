"""Scaling and conformal rescaling of structure fields, with the closed-form
transformation laws used to cross-check them."""
from __future__ import annotations

import numpy as np

from ..frame import _E
from .calculus import christoffel, nabla, partial_tensor
from .structure import StructureField
from .torsion import torsion
from .grid import GridSpec

__all__ = [
    "transform_scaling",
    "transform_conformal",
    "scaling_residuals",
    "conformal_christoffel_expected",
    "conformal_torsion_expected",
    "conformal_nabla_torsion_expected",
    "conformal_residuals",
]


def transform_scaling(sf: StructureField, lam: float) -> StructureField:
    """The field lam^3 phi, whose metric is lam^2 g."""
    lam = float(lam)
    if lam <= 0.0:
        raise ValueError("scaling factor must be positive")
    meta = dict(sf.meta)
    meta["scaled_by"] = lam
    return StructureField(sf.grid, lam**3 * sf.phi, meta=meta)


def transform_conformal(sf: StructureField, f: np.ndarray) -> StructureField:
    """The field exp(3f) phi, whose metric is exp(2f) g."""
    f = np.asarray(f, dtype=float)
    if f.shape != sf.grid.shape:
        raise ValueError(f"f must be a scalar field of shape {sf.grid.shape}")
    meta = dict(sf.meta)
    meta["conformal"] = True
    return StructureField(sf.grid, np.exp(3.0 * f)[..., None, None, None] * sf.phi, meta=meta)


def scaling_residuals(sf: StructureField, lam: float = 2.0) -> dict:
    """How the scaled field's quantities relate to the original:
    g -> lam^2 g, psi -> lam^4 psi, vol -> lam^7 vol, T -> lam T,
    Gamma unchanged, R_ijkl -> lam^2 R_ijkl, K^a unchanged."""
    from .calculus import curvature

    sfs = transform_scaling(sf, lam)
    tp, tps = torsion(sf), torsion(sfs)
    cf, cfs = curvature(sf), curvature(sfs)
    out = {
        "g": float(np.abs(sfs.g - lam**2 * sf.g).max()),
        "psi": float(np.abs(sfs.psi - lam**4 * sf.psi).max()),
        "vol": float(np.abs(sfs.vol - lam**7 * sf.vol).max()),
        "christoffel": float(np.abs(christoffel(sfs) - christoffel(sf)).max()),
        "T": float(np.abs(tps.T - lam * tp.T).max()),
        "T27": float(np.abs(tps.T27 - lam * tp.T27).max()),
        "T14": float(np.abs(tps.T14 - lam * tp.T14).max()),
        "nablaT": float(np.abs(tps.nablaT - lam * tp.nablaT).max()),
        "K1": float(np.abs(tps.K1 - tp.K1).max()),
        "K2": float(np.abs(tps.K2 - tp.K2).max()),
        "K3": float(np.abs(tps.K3 - tp.K3).max()),
        "riemann": float(np.abs(cfs.riemann.data - lam**2 * cf.riemann.data).max()),
        "ricci": float(np.abs(cfs.ricci - cf.ricci).max()),
        "scalar": float(np.abs(cfs.scalar - cf.scalar / lam**2).max()),
        "F": float(np.abs(cfs.fmap - cf.fmap).max()),
    }
    return out


def conformal_christoffel_expected(sf: StructureField, f: np.ndarray) -> np.ndarray:
    """Gamma-tilde^k_ij = Gamma^k_ij + delta^k_i f_j + delta^k_j f_i
    - g^{kl} f_l g_ij for the metric exp(2f) g."""
    df = partial_tensor(sf, np.asarray(f, dtype=float))
    eye = np.eye(7)
    fup = _E("...l,...lk->...k", df, sf.ginv)
    return (
        christoffel(sf)
        + _E("ik,...j->...ijk", eye, df)
        + _E("jk,...i->...ijk", eye, df)
        - _E("...k,...ij->...ijk", fup, sf.g)
    )


def conformal_torsion_expected(sf: StructureField, f: np.ndarray) -> np.ndarray:
    """T-tilde_pq = e^f (T_pq + nabla_m f phi^m{}_pq)."""
    tp = torsion(sf)
    df = partial_tensor(sf, np.asarray(f, dtype=float))
    grad_phi = _E("...m,...ma,...apq->...pq", df, sf.ginv, sf.phi)
    return np.exp(f)[..., None, None] * (tp.T + grad_phi)


def conformal_nabla_torsion_expected(sf: StructureField, f: np.ndarray) -> np.ndarray:
    """The covariant derivative of the conformal torsion with respect to the
    rescaled structure, written entirely in base-field quantities:
    e^{-f} nabla-tilde_i T-tilde_pq expanded into eleven terms."""
    fp = sf.fp
    ginv = sf.ginv
    tp = torsion(sf)
    t, nt = tp.T, tp.nablaT
    f = np.asarray(f, dtype=float)
    df = partial_tensor(sf, f)
    ddf = nabla(sf, df, 1)
    df_up = _E("...a,...am->...m", df, ginv)

    out = nt.copy()
    out -= _E("...i,...pq->...ipq", df, t)
    out -= _E("...p,...iq->...ipq", df, t)
    out -= _E("...q,...pi->...ipq", df, t)
    out += _E("...ip,...m,...mq->...ipq", sf.g, df_up, t)
    out += _E("...iq,...m,...pm->...ipq", sf.g, df_up, t)
    out += _E("...m,...ik,...kc,...cmpq->...ipq", df_up, t, ginv, fp.psi)
    out -= _E("...i,...m,...mpq->...ipq", df, df_up, fp.phi)
    out -= _E("...p,...k,...kiq->...ipq", df, df_up, fp.phi)
    out -= _E("...q,...k,...kpi->...ipq", df, df_up, fp.phi)
    out += _E("...im,...mn,...npq->...ipq", ddf, ginv, fp.phi)
    return np.exp(f)[..., None, None, None] * out


def conformal_residuals(sf: StructureField, f: np.ndarray) -> dict:
    """Recompute everything on the rescaled field exp(3f) phi and compare with
    the closed-form laws: Christoffel, T, nabla T, and the component laws
    T1/T27/T14 -> e^f (same part), T7 -> e^f (T7 + grad f interior phi)."""
    f = np.asarray(f, dtype=float)
    sft = transform_conformal(sf, f)
    tp, tpt = torsion(sf), torsion(sft)
    ef = np.exp(f)[..., None, None]
    grad_phi = _E("...m,...ma,...apq->...pq", partial_tensor(sf, f), sf.ginv, sf.phi)
    return {
        "christoffel": float(np.abs(christoffel(sft) - conformal_christoffel_expected(sf, f)).max()),
        "T": float(np.abs(tpt.T - conformal_torsion_expected(sf, f)).max()),
        "nablaT": float(np.abs(tpt.nablaT - conformal_nabla_torsion_expected(sf, f)).max()),
        "T1": float(np.abs(tpt.T1 - ef * tp.T1).max()),
        "T27": float(np.abs(tpt.T27 - ef * tp.T27).max()),
        "T7": float(np.abs(tpt.T7 - ef * (tp.T7 + grad_phi)).max()),
        "T14": float(np.abs(tpt.T14 - ef * tp.T14).max()),
    }
