"""Torsion of a structure field and the identities that tie it to curvature:
the first-order torsion package, the structure Bianchi identity with its
irreducible components, curvature reconstructed from torsion, and the
optimal compatible connection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra import (
    Tensor2Decomp,
    circledcirc,
    decompose_tensor2,
    diamond,
    form2_fourteen_part,
    interior7,
    p_op,
    v_op,
)
from ..frame import _E, raise_all, t2_inner, t2_trace
from .calculus import (
    codifferential,
    curl,
    curvature,
    exterior_derivative,
    lie_derivative_metric,
    nabla,
    nabla_phi,
    nabla_psi,
    partial_tensor,
)
from .structure import StructureField

__all__ = [
    "TorsionPackage",
    "torsion",
    "torsion_identities",
    "bianchi_residuals",
    "ric_F_from_torsion",
    "ric_F_residuals",
    "optimal_connection_check",
    "lie_derivative_phi_framed",
    "mat_mul",
    "mat_vec",
]


def mat_mul(a: np.ndarray, b: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """(AB)_ij = A_ik g^{kl} B_lj for lower-index 2-tensors."""
    return _E("...ik,...kl,...lj->...ij", a, ginv, b)


def mat_vec(a: np.ndarray, x: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """(AX)_i = A_ik g^{kl} X_l for a lower-index 2-tensor and covector."""
    return _E("...ik,...kl,...l->...i", a, ginv, x)


def _t(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + _t(a))


@dataclass
class TorsionPackage:
    """Torsion T of a structure field together with its first derivatives.

    T is defined by nabla_m phi_ijk = T_m{}^p psi_pijk.  ``decomp`` carries
    the split into trace, traceless-symmetric, 7- and 14-parts; K1/K2/K3 are
    the three phi-contractions of nabla T; nabTpsi is the psi-contraction
    nabla_i T_jk psi^{ijk}{}_m.
    """

    sf: StructureField
    T: np.ndarray
    trT: np.ndarray
    decomp: Tensor2Decomp
    nablaT: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    K3: np.ndarray
    divT: np.ndarray
    divTt: np.ndarray
    divVT: np.ndarray
    hatT: np.ndarray
    nabTpsi: np.ndarray
    _derived: dict = field(default_factory=dict, repr=False)

    @property
    def VT(self) -> np.ndarray:
        return self.decomp.vec7

    @property
    def T1(self) -> np.ndarray:
        return self.decomp.trace_part()

    @property
    def T27(self) -> np.ndarray:
        return self.decomp.sym0

    @property
    def T7(self) -> np.ndarray:
        return self.decomp.seven()

    @property
    def T14(self) -> np.ndarray:
        return self.decomp.skew14

    @property
    def PT(self) -> np.ndarray:
        if "PT" not in self._derived:
            self._derived["PT"] = p_op(self.T, self.sf.fp)
        return self._derived["PT"]

    def scalar_densities(self) -> dict:
        """Pointwise quadratic torsion scalars, computed directly."""
        if "scalars" not in self._derived:
            ginv = self.sf.ginv
            self._derived["scalars"] = {
                "trT2": self.trT**2,
                "normT2": t2_inner(self.T, self.T, ginv),
                "TTt": t2_inner(self.T, _t(self.T), ginv),
                "TPT": t2_inner(self.T, self.PT, ginv),
                "normT1_2": t2_inner(self.T1, self.T1, ginv),
                "normT27_2": t2_inner(self.T27, self.T27, ginv),
                "normT7_2": t2_inner(self.T7, self.T7, ginv),
                "normT14_2": t2_inner(self.T14, self.T14, ginv),
            }
        return self._derived["scalars"]


def torsion(sf: StructureField) -> TorsionPackage:
    """Torsion and its first covariant derivative, with the standard
    contractions."""

    def build():
        fp = sf.fp
        ginv = sf.ginv
        nphi = nabla_phi(sf)
        nphi_up = _E("...pabc,...aj,...bk,...cl->...pjkl", nphi, ginv, ginv, ginv)
        t = _E("...pjkl,...qjkl->...pq", nphi_up, fp.psi) / 24.0
        dec = decompose_tensor2(t, fp)
        nt = nabla(sf, t, 2)
        nt_up = raise_all(nt, ginv, 3)
        k1 = _E("...apq,...bpq->...ab", _E("...aij,...ip,...jq->...apq", nt, ginv, ginv), fp.phi)
        k2 = _E("...paq,...pbq->...ab", _E("...iaj,...ip,...jq->...paq", nt, ginv, ginv), fp.phi)
        k3 = _E("...pqa,...pqb->...ab", _E("...ija,...ip,...jq->...pqa", nt, ginv, ginv), fp.phi)
        div_t = _E("...pik,...pi->...k", nt, ginv)
        div_tt = _E("...pki,...pi->...k", nt, ginv)
        nvt = nabla(sf, dec.vec7, 1)
        div_vt = _E("...pk,...pk->...", nvt, ginv)
        hat_t = _E("...pq,...qm,...mij->...pij", t, ginv, fp.phi)
        nabtpsi = _E("...ijk,...ijkm->...m", nt_up, fp.psi)
        return TorsionPackage(
            sf=sf,
            T=t,
            trT=t2_trace(t, ginv),
            decomp=dec,
            nablaT=nt,
            K1=k1,
            K2=k2,
            K3=k3,
            divT=div_t,
            divTt=div_tt,
            divVT=div_vt,
            hatT=hat_t,
            nabTpsi=nabtpsi,
        )

    return sf.cached("torsion", build)


def _maxabs(arr) -> float:
    return float(np.abs(arr).max())


def torsion_identities(sf: StructureField) -> dict:
    """Residuals of the first-order torsion identities; every entry is pure
    discretization error (or exact where noted)."""
    fp = sf.fp
    ginv = sf.ginv
    tp = torsion(sf)
    t, pt, vt = tp.T, tp.PT, tp.VT
    out = {}

    # defining identity and its 4-form sibling
    out["nabla_phi"] = _maxabs(
        nabla_phi(sf) - _E("...mp,...pq,...qijk->...mijk", t, ginv, fp.psi)
    )
    npsi_model = (
        -_E("...pi,...jkl->...pijkl", t, fp.phi)
        + _E("...pj,...ikl->...pijkl", t, fp.phi)
        - _E("...pk,...ijl->...pijkl", t, fp.phi)
        + _E("...pl,...ijk->...pijkl", t, fp.phi)
    )
    out["nabla_psi"] = _maxabs(nabla_psi(sf) - npsi_model)

    # exterior derivatives: d phi = T diamond psi, d* phi = P T
    out["dphi"] = _maxabs(exterior_derivative(sf, sf.phi, 3) - diamond(t, fp.psi, fp))
    out["dstar_phi"] = _maxabs(codifferential(sf, sf.phi, 3) - pt)

    # hatT contracts back to T: T_pq = (1/6) hatT_pij phi_q{}^{ij}
    t_back = _E("...pij,...ia,...jb,...qab->...pq", tp.hatT, ginv, ginv, fp.phi) / 6.0
    out["hatT_roundtrip"] = _maxabs(t_back - t)

    # the three traces of the K tensors agree
    trk1 = t2_trace(tp.K1, ginv)
    trk2 = t2_trace(tp.K2, ginv)
    trk3 = t2_trace(tp.K3, ginv)
    out["trK12"] = _maxabs(trk1 - trk2)
    out["trK13"] = _maxabs(trk1 - trk3)

    # K1 + T(PT) = nabla(VT)
    nvt = nabla(sf, vt, 1)
    out["K1_simp"] = _maxabs(tp.K1 + mat_mul(t, pt, ginv) - nvt)

    # tr K = Div(VT) + <T, PT>
    out["divVT"] = _maxabs(trk1 - tp.divVT - t2_inner(t, pt, ginv))

    # V of the K tensors
    out["V_K1"] = _maxabs(v_op(tp.K1, fp) - (tp.divTt - tp.divT + tp.nabTpsi))
    dtr = partial_tensor(sf, tp.trT)
    out["V_K2"] = _maxabs(v_op(tp.K2, fp) - (tp.divT - dtr + tp.nabTpsi))
    out["V_K3"] = _maxabs(v_op(tp.K3, fp) - (dtr - tp.divTt + tp.nabTpsi))

    # curl(VT) after the structure Bianchi identity
    tvt = mat_vec(t, vt, ginv)
    ttvt = mat_vec(_t(t), vt, ginv)
    out["curlVT"] = _maxabs(curl(sf, vt) - (tp.divTt - tp.divT + ttvt - tvt))
    return out


def bianchi_residuals(sf: StructureField) -> dict:
    """Residuals of the structure Bianchi identity and its seven irreducible
    components; all entries vanish analytically, so what remains is pure
    discretization error."""
    fp = sf.fp
    ginv = sf.ginv
    tp = torsion(sf)
    cf = curvature(sf)
    t, pt, vt = tp.T, tp.PT, tp.VT
    nt = tp.nablaT
    rm = cf.riemann.data

    tt_phi = _E("...ia,...jb,...am,...bn,...mnp->...ijp", t, t, ginv, ginv, fp.phi)
    rm_phi = _E("...ijab,...am,...bn,...mnp->...ijp", rm, ginv, ginv, fp.phi)
    g_full = (
        _E("...ijp->...pij", nt)
        - _E("...jip->...pij", nt)
        - _E("...ijp->...pij", tt_phi)
        - 0.5 * _E("...ijp->...pij", rm_phi)
    )

    scal = tp.scalar_densities()
    t2 = mat_mul(t, t, ginv)
    tvt = mat_vec(t, vt, ginv)
    ttvt = mat_vec(_t(t), vt, ginv)
    dtr = partial_tensor(sf, tp.trT)

    g1 = cf.scalar - (
        scal["trT2"] - scal["TTt"] - scal["TPT"] - 2.0 * tp.divVT
    )
    g7a = tp.divTt - dtr - tvt
    g7b = tp.nabTpsi - tp.trT[..., None] * vt + v_op(t2, fp) + ttvt

    def part14(a):
        return form2_fourteen_part(0.5 * (a - _t(a)), fp)

    def part27(a):
        sym = _sym(a)
        return sym - (t2_trace(a, ginv) / 7.0)[..., None, None] * fp.g

    ptt = mat_mul(pt, t, ginv)
    g14 = part14(tp.K3) - (
        -tp.trT[..., None, None] * tp.T14 + part14(t2) + part14(ptt)
    )
    tct = circledcirc(t, t, fp)
    g27a = part27(tp.K3) - 0.5 * part27(tct) - 0.25 * part27(cf.fmap)
    lie_vt = lie_derivative_metric(sf, vt)
    g27b = part27(tp.K2) - (
        -0.5 * part27(lie_vt)
        + tp.trT[..., None, None] * tp.T27
        - part27(t2)
        - part27(cf.ricci)
    )

    return {
        "G_full": _maxabs(g_full),
        "G1": _maxabs(g1),
        "G7a": _maxabs(g7a),
        "G7b": _maxabs(g7b),
        "G14": _maxabs(g14),
        "G27a": _maxabs(g27a),
        "G27b": _maxabs(g27b),
    }


def ric_F_from_torsion(sf: StructureField) -> tuple:
    """Ricci tensor and the 4th-order curvature contraction F rebuilt from
    torsion data alone, through the structure Bianchi identity."""
    fp = sf.fp
    ginv = sf.ginv
    tp = torsion(sf)
    t = tp.T
    nt = tp.nablaT

    nt_13 = _E("...aib,...ap,...bq->...piq", nt, ginv, ginv)
    nt_23 = _E("...iab,...ap,...bq->...ipq", nt, ginv, ginv)
    nt_12 = _E("...abi,...ap,...bq->...pqi", nt, ginv, ginv)
    term_pq_phi = _E("...piq,...pjq->...ij", nt_13, fp.phi)
    term_i_phi = _E("...ipq,...jpq->...ij", nt_23, fp.phi)
    tpsi = _E(
        "...im,...pq,...abcj,...pa,...qb,...mc->...ij", t, t, fp.psi, ginv, ginv, ginv
    )
    t2 = mat_mul(t, t, ginv)
    ric = (
        -_sym(term_pq_phi)
        - _sym(term_i_phi)
        - _sym(tpsi)
        + tp.trT[..., None, None] * _sym(t)
        - _sym(t2)
    )

    # the quadratic term needs explicit symmetrization: the contraction of
    # the structure Bianchi tensor gives 2 K3 = (T <*> T)^t + F/2, and T <*> T
    # is not symmetric when T has mixed type
    term_qi_phi = _E("...pqi,...pqj->...ij", nt_12, fp.phi)
    f = 2.0 * term_qi_phi + 2.0 * _t(term_qi_phi) - 2.0 * _sym(circledcirc(t, t, fp))
    return ric, f


def ric_F_residuals(sf: StructureField) -> dict:
    """Compare the torsion-side Ricci and F with the curvature side, and the
    two symmetrised K contractions with their closed forms."""
    fp = sf.fp
    ginv = sf.ginv
    tp = torsion(sf)
    cf = curvature(sf)
    t, pt = tp.T, tp.PT
    t2 = mat_mul(t, t, ginv)
    tct = circledcirc(t, t, fp)
    ric_t, f_t = ric_F_from_torsion(sf)
    lie_vt = lie_derivative_metric(sf, tp.VT)

    kk2 = _sym(tp.K2) - (
        -0.5 * lie_vt
        + tp.trT[..., None, None] * _sym(t)
        - _sym(t2)
        - cf.ricci
    )
    kk3 = _sym(tp.K3) - (0.5 * _sym(tct) + 0.25 * cf.fmap)
    return {
        "ric": _maxabs(ric_t - cf.ricci),
        "F": _maxabs(f_t - cf.fmap),
        "trF_plus_2R": _maxabs(t2_trace(f_t, ginv) + 2.0 * cf.scalar),
        "K2_symm": _maxabs(kk2),
        "K3_symm": _maxabs(kk3),
    }


def optimal_connection_check(sf: StructureField) -> dict:
    """Residuals for the optimal compatible connection with contorsion
    -(1/3) hatT: it must annihilate phi, and its curvature must take values
    in the 14-dimensional subspace in the last index pair."""
    fp = sf.fp
    ginv = sf.ginv
    tp = torsion(sf)
    a = -tp.hatT / 3.0

    nphi = nabla_phi(sf)
    corr = (
        _E("...pim,...mn,...njk->...pijk", a, ginv, sf.phi)
        + _E("...pjm,...mn,...ink->...pijk", a, ginv, sf.phi)
        + _E("...pkm,...mn,...ijn->...pijk", a, ginv, sf.phi)
    )
    nhat_phi = nphi - corr

    rm = curvature(sf).riemann.data
    na = nabla(sf, a, 3)
    rhat = (
        rm
        + na
        - _E("...jikl->...ijkl", na)
        + _E("...iml,...jkn,...mn->...ijkl", a, a, ginv)
        - _E("...jml,...ikn,...mn->...ijkl", a, a, ginv)
    )
    rhat_phi = _E("...ijkl,...ka,...lb,...abm->...ijm", rhat, ginv, ginv, sf.phi)
    return {
        "nabla_hat_phi": _maxabs(nhat_phi),
        "rhat_phi_contraction": _maxabs(rhat_phi),
    }


def lie_derivative_phi_framed(sf: StructureField, w: np.ndarray) -> np.ndarray:
    """Lie derivative of phi along W through the frame decomposition:
    (1/2 L_W g + (-1/3 T^t W + 1/6 curl W) . phi) diamond phi."""
    fp = sf.fp
    tp = torsion(sf)
    ttw = mat_vec(_t(tp.T), w, sf.ginv)
    vec = -ttw / 3.0 + curl(sf, w) / 6.0
    a = 0.5 * lie_derivative_metric(sf, w) + interior7(vec, fp)
    return diamond(a, sf.phi, fp)
