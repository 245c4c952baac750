"""First-order G2 algebra: diamond products, the P and V operators, and the
decomposition of 2-tensors and of 3- and 4-forms into irreducible pieces.

Every operation takes a :class:`~g2calc.frame.FramePoint` and works in an
arbitrary coordinate frame (explicit inverse-metric raises), broadcasting over
leading batch axes.

Conventions.  A 2-tensor A splits as

    A = (1/7)(tr A) g + A_27 + A_7 + A_14,

where A_27 is traceless symmetric, A_7 = (1/6)(VA . phi) with
(VA)_k = A^{ij} phi_ijk, and A_14 is the skew remainder, characterized by
(A_14)^{ij} phi_ijk = 0.  On 2-forms P acts as -4 on the 7-part and +2 on the
14-part and kills symmetric tensors; P^2 = 8 I - 2 P on 2-forms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import FramePoint, _E, raise_all, t2_trace

__all__ = [
    "Tensor2Decomp",
    "Form3Decomp",
    "Form4Decomp",
    "diamond",
    "p_op",
    "v_op",
    "decompose_tensor2",
    "decompose_form3",
    "decompose_form4",
    "circledcirc",
    "cross",
    "interior7",
    "form2_seven_part",
    "form2_fourteen_part",
]




def interior7(x: np.ndarray, fp: FramePoint) -> np.ndarray:
    """The 2-form X . phi from a covector X: (X . phi)_ab = X^p phi_pab."""
    return _E("...q,...qp,...pab->...ab", x, fp.ginv, fp.phi)


def diamond(a: np.ndarray, sigma: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Diamond action of a 2-tensor on a k-form, k = 2, 3 or 4.

    (A diamond sigma)_{i_1...i_k} = sum_s A_{i_s}{}^p sigma_{i_1..p..i_k},
    so g diamond sigma = k sigma and the skew 14-part of A acts as zero on
    phi and psi.
    """
    sigma = np.asarray(sigma, dtype=float)
    k = sigma.ndim - len(fp.batch_shape)
    if k not in (2, 3, 4):
        raise ValueError(f"diamond expects a 2-, 3- or 4-form, got degree {k}")
    a_mixed = _E("...ia,...ap->...ip", a, fp.ginv)
    idx = "ijkl"[:k]
    out = np.zeros(np.broadcast_shapes(a.shape[:-2], sigma.shape[: -k]) + (7,) * k)
    for s in range(k):
        src = idx[:s] + "p" + idx[s + 1 :]
        out += _E(f"...{idx[s]}p,...{src}->...{idx}", a_mixed, sigma)
    return out


def p_op(beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    """(P beta)_ab = beta^{ij} psi_ijab.  Self-adjoint; P^2 = 8I - 2P on 2-forms."""
    bu = raise_all(beta, fp.ginv, 2)
    return _E("...ij,...ijab->...ab", bu, fp.psi)


def v_op(a: np.ndarray, fp: FramePoint) -> np.ndarray:
    """(VA)_k = A^{ij} phi_ijk.  Kills symmetric tensors and the 14-part."""
    au = raise_all(a, fp.ginv, 2)
    return _E("...ij,...ijk->...k", au, fp.phi)


@dataclass(frozen=True)
class Tensor2Decomp:
    """Split of a 2-tensor into trace, traceless-symmetric, 7- and 14-parts.

    trace:  tr A (batch scalar)
    sym0:   traceless symmetric part
    vec7:   the covector VA; the 7-part itself is (1/6)(VA . phi)
    skew14: skew part with vanishing phi-contraction
    """

    trace: np.ndarray
    sym0: np.ndarray
    vec7: np.ndarray
    skew14: np.ndarray
    fp: FramePoint

    def trace_part(self) -> np.ndarray:
        return (self.trace / 7.0)[..., None, None] * self.fp.g

    def seven(self) -> np.ndarray:
        return interior7(self.vec7, self.fp) / 6.0

    def reassemble(self) -> np.ndarray:
        return self.trace_part() + self.sym0 + self.seven() + self.skew14

    def parts(self) -> dict:
        return {
            "trace": self.trace_part(),
            "sym0": self.sym0,
            "seven": self.seven(),
            "skew14": self.skew14,
        }


def decompose_tensor2(a: np.ndarray, fp: FramePoint) -> Tensor2Decomp:
    """Split A into (1/7)(trA)g + A_27 + A_7 + A_14; the pieces are g-orthogonal."""
    a = np.asarray(a, dtype=float)
    tra = t2_trace(a, fp.ginv)
    sym = 0.5 * (a + np.swapaxes(a, -1, -2))
    sym0 = sym - (tra / 7.0)[..., None, None] * fp.g
    skew = a - sym
    va = v_op(skew, fp)
    skew14 = skew - interior7(va, fp) / 6.0
    return Tensor2Decomp(trace=tra, sym0=sym0, vec7=va, skew14=skew14, fp=fp)


@dataclass(frozen=True)
class Form3Decomp:
    """The unique A in S^2 + Omega^2_7 with A diamond phi equal to a 3-form."""

    coeffs: Tensor2Decomp

    def reassemble_form(self) -> np.ndarray:
        fp = self.coeffs.fp
        return diamond(self.coeffs.reassemble(), fp.phi, fp)


@dataclass(frozen=True)
class Form4Decomp:
    """The unique A in S^2 + Omega^2_7 with A diamond psi equal to a 4-form."""

    coeffs: Tensor2Decomp

    def reassemble_form(self) -> np.ndarray:
        fp = self.coeffs.fp
        return diamond(self.coeffs.reassemble(), fp.psi, fp)


def decompose_form3(gamma: np.ndarray, fp: FramePoint) -> Form3Decomp:
    """Invert A diamond phi = gamma over A in S^2 + Omega^2_7.

    Works through the phi-contraction gamma^phi_ia = gamma_ijk phi_a{}^{jk}:
    tr A = (1/18) tr gamma^phi, A_27 = (1/4) (gamma^phi)_27,
    A_7 = (1/12) (gamma^phi)_7.
    """
    gamma = np.asarray(gamma, dtype=float)
    gphi = _E("...ijk,...abc,...jb,...kc->...ia", gamma, fp.phi, fp.ginv, fp.ginv)
    d = decompose_tensor2(gphi, fp)
    coeffs = Tensor2Decomp(
        trace=d.trace / 18.0,
        sym0=d.sym0 / 4.0,
        vec7=d.vec7 / 12.0,
        skew14=np.zeros_like(d.skew14),
        fp=fp,
    )
    return Form3Decomp(coeffs=coeffs)


def decompose_form4(eta: np.ndarray, fp: FramePoint) -> Form4Decomp:
    """Invert B diamond psi = eta over B in S^2 + Omega^2_7.

    Works through eta^psi_ia = eta_ijkl psi_a{}^{jkl}: tr B = (1/96) tr eta^psi,
    B_27 = (1/12) (eta^psi)_27, B_7 = (1/36) (eta^psi)_7.
    """
    eta = np.asarray(eta, dtype=float)
    epsi = _E(
        "...ijkl,...abcd,...jb,...kc,...ld->...ia", eta, fp.psi, fp.ginv, fp.ginv, fp.ginv
    )
    d = decompose_tensor2(epsi, fp)
    coeffs = Tensor2Decomp(
        trace=d.trace / 96.0,
        sym0=d.sym0 / 12.0,
        vec7=d.vec7 / 36.0,
        skew14=np.zeros_like(d.skew14),
        fp=fp,
    )
    return Form4Decomp(coeffs=coeffs)


def circledcirc(a: np.ndarray, b: np.ndarray, fp: FramePoint) -> np.ndarray:
    """(A circledcirc B)_pq = A^{im} B^{jn} phi_ijp phi_mnq."""
    au = raise_all(np.asarray(a, dtype=float), fp.ginv, 2)
    bu = raise_all(np.asarray(b, dtype=float), fp.ginv, 2)
    return _E("...im,...jn,...ijp,...mnq->...pq", au, bu, fp.phi, fp.phi)


def cross(x: np.ndarray, y: np.ndarray, fp: FramePoint) -> np.ndarray:
    """(X x Y)_k = X^p Y^q phi_pqk; bilinear, antisymmetric, and
    <X x Y, Z> = phi(X, Y, Z)."""
    return _E(
        "...a,...ap,...b,...bq,...pqk->...k", x, fp.ginv, y, fp.ginv, fp.phi
    )


def form2_seven_part(beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Projection of a 2-form onto the 7-dimensional piece: (1/6)(2 beta - P beta)."""
    return (2.0 * beta - p_op(beta, fp)) / 6.0


def form2_fourteen_part(beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Projection of a 2-form onto the 14-dimensional piece: (1/6)(4 beta + P beta)."""
    return (4.0 * beta + p_op(beta, fp)) / 6.0
