"""Transfer maps and irreducible decompositions for the rank-3 and rank-4
tensor spaces attached to a G2-structure.

The central objects are elements of S^2(Lambda^2): rank-4 tensors with the
pair symmetries of a curvature tensor, acting as self-adjoint operators on
2-forms via (U beta)_ij = U_ij{}^{kl} beta_kl.  The module provides

  * iota_g / rho_g and iota_phi / rho_phi, the maps that move symmetric
    2-tensors into S^2(Lambda^2) and back;
  * the Weyl splitting of a curvature-like tensor into scalar, traceless
    Ricci, and Weyl parts, and the further splitting of the Weyl part;
  * the block structure of a curvature operator with respect to the
    splitting of 2-forms into their 7- and 14-dimensional parts;
  * the irreducible decompositions of rank-3 tensors that are 2-forms in
    the last index pair (7x14) or traceless-symmetric there (7x27), the
    isometry identifying the two 64-dimensional pieces, and the
    decomposition of self-adjoint operators on the 14-part.

As everywhere in this package, tensors are stored with all indices down,
contractions carry explicit inverse-metric raises, and every kernel
broadcasts over leading batch axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import decompose_form3, decompose_tensor2, diamond
from .frame import DenseTensor, FramePoint, Sym, _E, raise_all, t2_trace

__all__ = [
    "FirstBianchiViolation",
    "NotWeyl",
    "NotIn7x14",
    "NotIn7x27",
    "NotIn64",
    "NotInS214",
    "CurvLike",
    "CurvatureBlocks",
    "Decomp7x14",
    "Decomp7x27",
    "DecompS214",
    "RepIdentityReport",
    "iota_g",
    "rho_g",
    "iota_phi",
    "rho_phi",
    "iota_phi_weyl",
    "iota_14",
    "lambda2_identity",
    "op_apply",
    "op_compose",
    "first_bianchi_residual",
    "weyl_split",
    "w27_extract",
    "curvature_blocks",
    "project_to_7x14",
    "decompose_7x14",
    "project_to_7x27",
    "decompose_7x27",
    "iso64",
    "iso64_inverse",
    "sandwich_14",
    "decompose_S2_14",
    "p_sandwich_suite",
]

# A tensor is accepted as satisfying a linear condition when the residual is
# below PRECONDITION_TOL relative to its magnitude; the first-Bianchi flag on
# CurvLike uses the tighter BIANCHI_FLAG_TOL, and operations that require the
# identity reject inputs above BIANCHI_FAULT_TOL.
BIANCHI_FLAG_TOL = 1e-10
BIANCHI_FAULT_TOL = 1e-6
PRECONDITION_TOL = 1e-8

_SQRT3 = math.sqrt(3.0)


class FirstBianchiViolation(ValueError):
    """Input does not satisfy the first Bianchi identity."""


class NotWeyl(ValueError):
    """Input has a nonzero Ricci contraction."""


class NotIn7x14(ValueError):
    """Rank-3 input is not a 14-type 2-form in its last index pair."""


class NotIn7x27(ValueError):
    """Rank-3 input is not traceless symmetric in its last index pair."""


class NotIn64(ValueError):
    """Input is not in the 64-dimensional piece of its ambient space."""


class NotInS214(ValueError):
    """Rank-4 input is not a self-adjoint operator on the 14-part."""


def _scale(arr: np.ndarray) -> float:
    """Magnitude floor used to make residual thresholds scale-invariant."""
    m = float(np.abs(arr).max()) if arr.size else 0.0
    return max(1.0, m)


def _as_s2l2(u) -> np.ndarray:
    """Raw array of an S^2(Lambda^2) element given as CurvLike/DenseTensor/array."""
    if isinstance(u, CurvLike):
        return u.data
    if isinstance(u, DenseTensor):
        return u.data
    return np.asarray(u, dtype=float)


def first_bianchi_residual(u) -> float:
    """Max-abs of the cyclic sum U_ijkl + U_jkil + U_kijl over all entries."""
    arr = _as_s2l2(u)
    cyc = arr + _E("...jkil->...ijkl", arr) + _E("...kijl->...ijkl", arr)
    return float(np.abs(cyc).max())


def _curvpair_project(arr: np.ndarray) -> np.ndarray:
    """Project onto S^2(Lambda^2) step by step; sequencing the three averages
    keeps every symmetry bit-exact, which a one-shot group average does not."""
    arr = 0.5 * (arr - np.swapaxes(arr, -4, -3))
    arr = 0.5 * (arr - np.swapaxes(arr, -2, -1))
    return 0.5 * (arr + _E("...klij->...ijkl", arr))


@dataclass(frozen=True)
class CurvLike:
    """An element of S^2(Lambda^2): skew in each index pair, symmetric under
    pair exchange.  The symmetries are enforced by projection on construction.

    ``bianchi_residual`` is the max-abs cyclic sum over the first three
    indices; ``satisfies_first_bianchi`` is set when that residual is below
    1e-10 relative to the entry magnitude, i.e. when the element lies in the
    subspace of genuine curvature tensors rather than merely in S^2(Lambda^2).

    Leading batch axes are allowed, so a grid of curvature tensors is one
    CurvLike; the residual and flag are then taken over the whole batch.
    """

    data: np.ndarray
    bianchi_residual: float = field(init=False)
    satisfies_first_bianchi: bool = field(init=False)

    def __post_init__(self):
        arr = np.asarray(_as_s2l2(self.data), dtype=float)
        if arr.ndim < 4 or arr.shape[-4:] != (7, 7, 7, 7):
            raise ValueError(f"expected trailing shape (7, 7, 7, 7), got {arr.shape}")
        arr = _curvpair_project(arr)
        arr.setflags(write=False)
        res = first_bianchi_residual(arr)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "bianchi_residual", res)
        object.__setattr__(
            self, "satisfies_first_bianchi", res <= BIANCHI_FLAG_TOL * _scale(arr)
        )

    @property
    def tensor(self) -> DenseTensor:
        """Unbatched view as a DenseTensor (raises ValueError if batched)."""
        return DenseTensor(self.data, Sym.CURVPAIR)


def _require_first_bianchi(u) -> np.ndarray:
    if not isinstance(u, CurvLike):
        u = CurvLike(_as_s2l2(u))
    if u.bianchi_residual > BIANCHI_FAULT_TOL * _scale(u.data):
        raise FirstBianchiViolation(
            f"first Bianchi residual {u.bianchi_residual:.3e} exceeds "
            f"{BIANCHI_FAULT_TOL:.0e}"
        )
    return u.data


# ---------------------------------------------------------------------------
# operators on 2-forms


def lambda2_identity(fp: FramePoint) -> np.ndarray:
    """The identity operator on 2-forms as an S^2(Lambda^2) element:
    I_ijkl = (1/2)(g_ik g_jl - g_il g_jk)."""
    g = fp.g
    return 0.5 * (_E("...ik,...jl->...ijkl", g, g) - _E("...il,...jk->...ijkl", g, g))


def op_apply(u, beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Apply an S^2(Lambda^2) element to a 2-form: (U beta)_ij = U_ij{}^{kl} beta_kl."""
    return _E(
        "...ijkl,...ka,...lb,...ab->...ij", _as_s2l2(u), fp.ginv, fp.ginv, beta
    )


def op_compose(u, v, fp: FramePoint) -> np.ndarray:
    """Operator composition (U o V) beta = U(V beta) as rank-4 arrays:
    (U o V)_ijkl = U_ij{}^{pq} V_pqkl."""
    return _E(
        "...ijab,...ap,...bq,...pqkl->...ijkl",
        _as_s2l2(u),
        fp.ginv,
        fp.ginv,
        _as_s2l2(v),
    )


def _p_both_sides(u, fp: FramePoint):
    """(PU + UP, PUP) for the 2-form operator P, which is the 4-form psi."""
    arr = _as_s2l2(u)
    pu = op_compose(fp.psi, arr, fp)
    up = op_compose(arr, fp.psi, fp)
    pup = op_compose(fp.psi, up, fp)
    return pu + up, pup


# ---------------------------------------------------------------------------
# transfer maps between S^2 and S^2(Lambda^2)


def iota_g(h: np.ndarray, fp: FramePoint) -> CurvLike:
    """Kulkarni-Nomizu style lift of a symmetric 2-tensor:
    (iota_g h)_ijkl = g_il h_jk + g_jk h_il - g_ik h_jl - g_jl h_ik.

    The image is a curvature tensor; iota_g(g) acts on 2-forms as -4 times
    the identity.
    """
    g = fp.g
    h = np.asarray(h, dtype=float)
    data = (
        _E("...il,...jk->...ijkl", g, h)
        + _E("...jk,...il->...ijkl", h, g)
        - _E("...ik,...jl->...ijkl", g, h)
        - _E("...jl,...ik->...ijkl", h, g)
    )
    return CurvLike(data)


def rho_g(u, fp: FramePoint) -> np.ndarray:
    """Ricci-style contraction (rho_g U)_jk = U^l{}_jk{}^l; zero on 4-forms,
    and rho_g(iota_g h) = 5h + (tr h)g."""
    return _E("...ajkb,...ab->...jk", _as_s2l2(u), fp.ginv)


def iota_phi(h: np.ndarray, fp: FramePoint) -> CurvLike:
    """(iota_phi h)_ijkl = h^{pq} phi_pij phi_qkl.  Lands in S^2(Lambda^2)
    but not in the curvature subspace; iota_phi(g) = 2I - P as operators."""
    hup = raise_all(np.asarray(h, dtype=float), fp.ginv, 2)
    return CurvLike(_E("...pq,...pij,...qkl->...ijkl", hup, fp.phi, fp.phi))


def rho_phi(u, fp: FramePoint) -> np.ndarray:
    """(rho_phi U)_pq = U^{ijkl} phi_ijp phi_klq, the adjoint of iota_phi.
    Applied to a Riemann tensor this is the 4th-order curvature contraction
    with trace -2R."""
    uup = raise_all(_as_s2l2(u), fp.ginv, 4)
    return _E("...ijkl,...ijp,...klq->...pq", uup, fp.phi, fp.phi)


def iota_phi_weyl(h: np.ndarray, fp: FramePoint) -> np.ndarray:
    """The Weyl component of iota_phi(h) for traceless symmetric h:
    iota_phi h - (1/3) h diamond psi - (1/5) iota_g h.

    The three summands are mutually orthogonal, and the round trip satisfies
    rho_phi(iota_phi_weyl(h)) = (448/15) h.
    """
    h = np.asarray(h, dtype=float)
    return (
        iota_phi(h, fp).data
        - diamond(h, fp.psi, fp) / 3.0
        - iota_g(h, fp).data / 5.0
    )


# ---------------------------------------------------------------------------
# Weyl splitting and the curvature blocks


def weyl_split(rm, fp: FramePoint):
    """Split a curvature tensor into scalar, traceless-Ricci, and Weyl parts:

        Rm = (1/84) R iota_g(g) + (1/5) iota_g(ric0) + W,

    returning (R, ric0, W) with rho_g(W) = 0.  Raises FirstBianchiViolation
    when the input's cyclic residual exceeds 1e-6 of its magnitude.
    """
    arr = _require_first_bianchi(rm)
    ric = rho_g(arr, fp)
    r = t2_trace(ric, fp.ginv)
    ric0 = ric - (np.asarray(r)[..., None, None] / 7.0) * fp.g
    w = (
        arr
        - (np.asarray(r)[..., None, None, None, None] / 84.0) * iota_g(fp.g, fp).data
        - iota_g(ric0, fp).data / 5.0
    )
    return r, ric0, CurvLike(w)


def w27_extract(w, fp: FramePoint):
    """Split a Weyl tensor as W = W27 + W_rest with

        varpi = rho_phi(W),   W27 = (15/448) iota_phi_weyl(varpi),

    returning (varpi, W27, W_rest); rho_phi(W_rest) = 0.  Raises NotWeyl when
    the input has a Ricci contraction above tolerance.
    """
    arr = _as_s2l2(w)
    ric = rho_g(arr, fp)
    if float(np.abs(ric).max()) > PRECONDITION_TOL * _scale(arr):
        raise NotWeyl(f"rho_g residual {np.abs(ric).max():.3e} above tolerance")
    varpi = rho_phi(arr, fp)
    w27 = (15.0 / 448.0) * iota_phi_weyl(varpi, fp)
    return varpi, CurvLike(w27), CurvLike(arr - w27)


@dataclass(frozen=True)
class CurvatureBlocks:
    """Complete decomposition of a curvature operator on 2-forms.

    scalar, ric0, varpi, W27/W64/W77 are the irreducible ingredients
    (F = rho_phi of the input satisfies F = -(2/5)Rg + (4/5)Ric + varpi and
    tr F = -2R); R77, R1414, Roff are the blocks of the operator with respect
    to the 7 + 14 splitting of 2-forms, computed by sandwiching with the
    projections (Roff is the sum of the two off-diagonal corners).
    """

    scalar: np.ndarray
    ric0: np.ndarray
    F: np.ndarray
    varpi: np.ndarray
    W27: CurvLike
    W64: CurvLike
    W77: CurvLike
    R77: CurvLike
    R1414: CurvLike
    Roff: CurvLike


def curvature_blocks(rm, fp: FramePoint) -> CurvatureBlocks:
    """Decompose a curvature tensor into its irreducible pieces and its
    blocks with respect to the 7 + 14 splitting of 2-forms.

    The blocks come from the projection sandwiches

        36 R77   =  4R - 2(PR + RP) + PRP,
        36 R1414 = 16R + 4(PR + RP) + PRP,
        36 Roff  = 16R - 2(PR + RP) - 2 PRP,

    and W77 / W64 are recovered by subtracting from R1414 / Roff their known
    closed-form parts built out of Rg, ric0, and varpi.
    """
    arr = _require_first_bianchi(rm)
    r, ric0, w = weyl_split(arr, fp)
    varpi, w27, _ = w27_extract(w, fp)

    anti, pup = _p_both_sides(arr, fp)
    r77 = (4.0 * arr - 2.0 * anti + pup) / 36.0
    r1414 = (16.0 * arr + 4.0 * anti + pup) / 36.0
    roff = (16.0 * arr - 2.0 * anti - 2.0 * pup) / 36.0

    rg = np.asarray(r)[..., None, None] * fp.g

    def dps(a):
        return diamond(a, fp.psi, fp)

    tail_1414 = (
        dps(-rg / 14.0 - (32.0 / 15.0) * ric0 - varpi / 6.0)
        + iota_g((2.0 / 7.0) * rg + (64.0 / 25.0) * ric0 + varpi / 5.0, fp).data
        + iota_phi_weyl((4.0 / 5.0) * ric0 + varpi / 16.0, fp)
    ) / 36.0
    tail_off = (
        dps((28.0 / 15.0) * ric0 - varpi / 6.0)
        + iota_g((112.0 / 25.0) * ric0 - (2.0 / 5.0) * varpi, fp).data
        + iota_phi_weyl(-(8.0 / 5.0) * ric0 + varpi / 7.0, fp)
    ) / 36.0

    w77 = CurvLike(r1414 - tail_1414)
    w64 = CurvLike(roff - tail_off)
    f = rho_phi(arr, fp)

    return CurvatureBlocks(
        scalar=r,
        ric0=ric0,
        F=f,
        varpi=varpi,
        W27=w27,
        W64=w64,
        W77=w77,
        R77=CurvLike(r77),
        R1414=CurvLike(r1414),
        Roff=CurvLike(roff),
    )


# ---------------------------------------------------------------------------
# rank-3 decompositions: 7 x 14


def _p_on_last2(t3: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Apply the P operator to the last index pair of a rank-3 tensor."""
    return _E(
        "...mab,...ai,...bj,...ijkl->...mkl", t3, fp.ginv, fp.ginv, fp.psi
    )


def _iota_from_form3(gamma: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Lift a 3-form into the 7x14 space: 6 times the 14-projection of its
    last index pair, (iota gamma)_ijk = 4 gamma_ijk + gamma_i{}^{pq} psi_pqjk."""
    return 4.0 * gamma + _p_on_last2(gamma, fp)


def project_to_7x14(beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Orthogonal projection of a rank-3 tensor onto 2-forms of 14-type in
    the last index pair (skew there, with vanishing phi-contraction)."""
    beta = np.asarray(beta, dtype=float)
    skew = 0.5 * (beta - np.swapaxes(beta, -1, -2))
    return (4.0 * skew + _p_on_last2(skew, fp)) / 6.0


def _cyclic3(t3: np.ndarray) -> np.ndarray:
    return t3 + _E("...jki->...ijk", t3) + _E("...kij->...ijk", t3)


@dataclass(frozen=True)
class Decomp7x14:
    """Irreducible parts of an element of the 98-dimensional 7x14 space.

    beta64 is the kernel of the cyclic sum; beta27 and beta7 are the lifts of
    the 27- and 7-parts of the cyclic sum, which is a 3-form.
    """

    beta64: np.ndarray
    beta27: np.ndarray
    beta7: np.ndarray

    def reassemble(self) -> np.ndarray:
        return self.beta64 + self.beta27 + self.beta7

    def parts(self) -> dict:
        return {"64": self.beta64, "27": self.beta27, "7": self.beta7}


def decompose_7x14(beta: np.ndarray, fp: FramePoint) -> Decomp7x14:
    """Split an element of the 7x14 space into 64 + 27 + 7 parts.

    The cyclic sum of an admissible beta is a 3-form with no 1-part; its 27-
    and 7-components pull back through the lift with factors 1/14 and 1/6,
    and the 64-part is the remainder.  Raises NotIn7x14 when the input is not
    in the space to within 1e-8 of its magnitude.
    """
    beta = np.asarray(beta, dtype=float)
    res = float(np.abs(beta - project_to_7x14(beta, fp)).max())
    if res > PRECONDITION_TOL * _scale(beta):
        raise NotIn7x14(f"projection residual {res:.3e} above tolerance")

    gamma = _cyclic3(beta)
    coeffs = decompose_form3(gamma, fp).coeffs
    gamma27 = diamond(coeffs.sym0, fp.phi, fp)
    gamma7 = diamond(coeffs.seven(), fp.phi, fp)
    beta27 = _iota_from_form3(gamma27, fp) / 14.0
    beta7 = _iota_from_form3(gamma7, fp) / 6.0
    return Decomp7x14(beta64=beta - beta27 - beta7, beta27=beta27, beta7=beta7)


# ---------------------------------------------------------------------------
# rank-3 decompositions: 7 x 27


def project_to_7x27(h: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Orthogonal projection of a rank-3 tensor onto traceless symmetric
    2-tensors in the last index pair."""
    h = np.asarray(h, dtype=float)
    sym = 0.5 * (h + np.swapaxes(h, -1, -2))
    tr = _E("...ijk,...jk->...i", sym, fp.ginv)
    return sym - _E("...i,...jk->...ijk", tr, fp.g) / 7.0


def _iota_from_sym2(a: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Step-three lift of a 2-tensor: (iota A)_ijk = A_j{}^p phi_pik + A_k{}^p phi_pij."""
    am = _E("...ja,...ap->...jp", np.asarray(a, dtype=float), fp.ginv)
    return _E("...jp,...pik->...ijk", am, fp.phi) + _E("...kp,...pij->...ijk", am, fp.phi)


def _rho_to_tensor2(t3: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Step-three contraction (rho h)_ja = h^i{}_j{}^k phi_iak; on the
    105-dimensional remainder it lands in traceless-symmetric + 14-type."""
    return _E("...ijk,...ip,...kq,...paq->...ja", t3, fp.ginv, fp.ginv, fp.phi)


@dataclass(frozen=True)
class Decomp7x27:
    """Irreducible parts of an element of the 189-dimensional 7x27 space:
    h77 and h7 come from the fully symmetric cyclic sum (h77 lifts the
    traceless cubics, the 77*-representation), and h64, h27, h14 split the
    remainder through its phi-contraction."""

    h77: np.ndarray
    h7: np.ndarray
    h64: np.ndarray
    h27: np.ndarray
    h14: np.ndarray

    def reassemble(self) -> np.ndarray:
        return self.h77 + self.h7 + self.h64 + self.h27 + self.h14

    def parts(self) -> dict:
        return {
            "77*": self.h77,
            "7": self.h7,
            "64": self.h64,
            "27": self.h27,
            "14": self.h14,
        }


def decompose_7x27(h: np.ndarray, fp: FramePoint) -> Decomp7x27:
    """Split an element of the 7x27 space into 77* + 7 + 64 + 27 + 14 parts.

    First the cyclic sum (a fully symmetric cubic) is split into its traceless
    part and its metric trace; their lifts back into the space carry factors
    1/3 and 7/12.  The remainder is contracted with phi into a 2-tensor whose
    traceless-symmetric and 14-parts lift back with factors -1/7 and -1/9,
    leaving the 64-part.  Raises NotIn7x27 when the input is not in the space
    to within 1e-8 of its magnitude.
    """
    h = np.asarray(h, dtype=float)
    res = float(np.abs(h - project_to_7x27(h, fp)).max())
    if res > PRECONDITION_TOL * _scale(h):
        raise NotIn7x27(f"projection residual {res:.3e} above tolerance")

    f = _cyclic3(h)
    x = _E("...abk,...ab->...k", f, fp.ginv)
    f7 = (
        _E("...i,...jk->...ijk", x, fp.g)
        + _E("...j,...ki->...ijk", x, fp.g)
        + _E("...k,...ij->...ijk", x, fp.g)
    ) / 9.0
    f77 = f - f7

    def lift_sym(cubic):
        trc = _E("...iab,...ab->...i", cubic, fp.ginv)
        return cubic - _E("...i,...jk->...ijk", trc, fp.g) / 7.0

    h77 = lift_sym(f77) / 3.0
    h7 = (7.0 / 12.0) * lift_sym(f7)
    h105 = h - h77 - h7

    b = _rho_to_tensor2(h105, fp)
    d = decompose_tensor2(b, fp)
    h27 = -_iota_from_sym2(d.sym0, fp) / 7.0
    h14 = -_iota_from_sym2(d.skew14, fp) / 9.0
    return Decomp7x27(h77=h77, h7=h7, h64=h105 - h27 - h14, h27=h27, h14=h14)


# ---------------------------------------------------------------------------
# the two 64-dimensional realizations


def _require_64_in_7x14(beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    tol = PRECONDITION_TOL * _scale(beta)
    res_space = float(np.abs(beta - project_to_7x14(beta, fp)).max())
    res_cyc = float(np.abs(_cyclic3(beta)).max())
    if res_space > tol or res_cyc > tol:
        raise NotIn64(
            f"7x14 residual {res_space:.3e}, cyclic residual {res_cyc:.3e}"
        )
    return beta


def _require_64_in_7x27(h: np.ndarray, fp: FramePoint) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    tol = PRECONDITION_TOL * _scale(h)
    res_space = float(np.abs(h - project_to_7x27(h, fp)).max())
    res_cyc = float(np.abs(_cyclic3(h)).max())
    res_phi = float(np.abs(_rho_to_tensor2(h, fp)).max())
    if res_space > tol or res_cyc > tol or res_phi > tol:
        raise NotIn64(
            f"7x27 residual {res_space:.3e}, cyclic {res_cyc:.3e}, "
            f"phi-contraction {res_phi:.3e}"
        )
    return h


def iso64(beta: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Isometry from the 64-part of 7x14 to the 64-part of 7x27:
    h_ijk = (beta_jik + beta_kij) / sqrt(3)."""
    beta = _require_64_in_7x14(beta, fp)
    return (_E("...jik->...ijk", beta) + _E("...kij->...ijk", beta)) / _SQRT3


def iso64_inverse(h: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Inverse isometry, from the 64-part of 7x27 back to 7x14:
    beta_ijk = (h_jik - h_kij) / sqrt(3)."""
    h = _require_64_in_7x27(h, fp)
    return (_E("...jik->...ijk", h) - _E("...kij->...ijk", h)) / _SQRT3


# ---------------------------------------------------------------------------
# operators on the 14-part


def sandwich_14(u, fp: FramePoint) -> np.ndarray:
    """Compress an operator on 2-forms to the 14-part: pi_14 U pi_14 with
    pi_14 = (1/6)(4I + P)."""
    pi14 = (4.0 * lambda2_identity(fp) + fp.psi) / 6.0
    return op_compose(pi14, op_compose(u, pi14, fp), fp)


def iota_14(h: np.ndarray, fp: FramePoint) -> np.ndarray:
    """Lift of a symmetric 2-tensor to an operator on the 14-part:
    pi_14 (iota_g h) pi_14, expanded so only two compositions are needed."""
    ig = iota_g(h, fp).data
    anti, pup = _p_both_sides(ig, fp)
    return (16.0 * ig + 4.0 * anti + pup) / 36.0


@dataclass(frozen=True)
class DecompS214:
    """Irreducible parts of a self-adjoint operator on the 14-part:
    trace piece (1), traceless Ricci-type piece (27), and the kernel of
    rho_g (77)."""

    U77: CurvLike
    U1: CurvLike
    U27: CurvLike

    def reassemble(self) -> np.ndarray:
        return self.U77.data + self.U1.data + self.U27.data

    def parts(self) -> dict:
        return {"77": self.U77, "1": self.U1, "27": self.U27}


def decompose_S2_14(u, fp: FramePoint) -> DecompS214:
    """Split a self-adjoint operator on the 14-part into 77 + 1 + 27.

    The Ricci-style contraction of the lift satisfies rho_g(iota_14 g) = 8g
    and rho_g(iota_14 h) = (16/9)h for traceless h, so the 1- and 27-parts
    pull back with factors 1/8 and 9/16; the 77-part is the remainder, and
    is characterized by having zero phi-contraction and zero rho_g.  Raises
    NotInS214 when the input is not pi_14-sandwiched to within 1e-8.
    """
    arr = _as_s2l2(u)
    res = float(np.abs(arr - sandwich_14(arr, fp)).max())
    if res > PRECONDITION_TOL * _scale(arr):
        raise NotInS214(f"sandwich residual {res:.3e} above tolerance")

    rho = rho_g(arr, fp)
    tr = t2_trace(rho, fp.ginv)
    rho0 = rho - (np.asarray(tr)[..., None, None] / 7.0) * fp.g
    u1 = iota_14((np.asarray(tr)[..., None, None] / 7.0) * fp.g, fp) / 8.0
    u27 = (9.0 / 16.0) * iota_14(rho0, fp)
    return DecompS214(
        U77=CurvLike(arr - u1 - u27), U1=CurvLike(u1), U27=CurvLike(u27)
    )


# ---------------------------------------------------------------------------
# the sandwich identity suite


@dataclass(frozen=True)
class RepIdentityReport:
    """Max-abs residuals of the P-sandwich identities, per named line."""

    residuals: dict
    threshold: float
    max_residual: float
    passed: bool

    def failing(self) -> list:
        return sorted(k for k, v in self.residuals.items() if v > self.threshold)


def p_sandwich_suite(
    fp: FramePoint, h: np.ndarray | None = None, threshold: float = 1e-9
) -> RepIdentityReport:
    """Evaluate the ten sandwich identities relating P to the lifts of a
    traceless symmetric 2-tensor h (a deterministic pseudo-random h is used
    when none is supplied; a supplied h is symmetrized and made traceless).

    The lines cover the anticommutator and conjugation of P with iota_g h,
    h diamond psi, iota_phi h, and the Weyl part of iota_phi h, plus the
    orthogonality of the three components of iota_phi h and the 448/15
    round-trip through rho_phi.
    """
    if h is None:
        rng = np.random.default_rng(7)
        h = rng.standard_normal(fp.batch_shape + (7, 7))
    h = np.asarray(h, dtype=float)
    h = 0.5 * (h + np.swapaxes(h, -1, -2))
    h = h - (np.asarray(t2_trace(h, fp.ginv))[..., None, None] / 7.0) * fp.g
    scale = _scale(h)

    ig = iota_g(h, fp).data
    iph = iota_phi(h, fp).data
    dps = diamond(h, fp.psi, fp)
    iw = iph - dps / 3.0 - ig / 5.0

    anti_ig, pup_ig = _p_both_sides(ig, fp)
    anti_dps, pup_dps = _p_both_sides(dps, fp)
    anti_iph, pup_iph = _p_both_sides(iph, fp)
    anti_iw, pup_iw = _p_both_sides(iw, fp)

    def norm(u):
        v = raise_all(u, fp.ginv, 4)
        return float(np.sqrt(np.abs(_E("...ijkl,...ijkl->...", u, v)).max()))

    def ip_max(a, b):
        bu = raise_all(b, fp.ginv, 4)
        val = float(np.abs(_E("...ijkl,...ijkl->...", a, bu)).max())
        na, nb = norm(a), norm(b)
        return val / (na * nb) if na > 0 and nb > 0 else val

    def res(u):
        return float(np.abs(u).max()) / scale

    residuals = {
        "iota_g_anticommutator": res(anti_ig + 2.0 * dps),
        "iota_g_conjugation": res(pup_ig + 4.0 * dps + 4.0 * ig - 4.0 * iph),
        "diamond_psi_anticommutator": res(anti_dps - 2.0 * dps + 4.0 * ig + 4.0 * iph),
        "diamond_psi_conjugation": res(pup_dps + 8.0 * ig - 8.0 * iph),
        "iota_phi_anticommutator": res(anti_iph + 8.0 * iph),
        "iota_phi_conjugation": res(pup_iph - 16.0 * iph),
        "weyl_part_orthogonality": max(
            ip_max(dps, ig), ip_max(dps, iw), ip_max(ig, iw)
        ),
        "weyl_part_anticommutator": res(
            anti_iw + (4.0 / 15.0) * dps - (4.0 / 3.0) * ig + (20.0 / 3.0) * iph
        ),
        "weyl_part_conjugation": res(
            pup_iw - (4.0 / 5.0) * dps - (52.0 / 15.0) * ig - (188.0 / 15.0) * iph
        ),
        "weyl_27_transfer": res(rho_phi(iw, fp) - (448.0 / 15.0) * h),
    }
    max_res = max(residuals.values())
    return RepIdentityReport(
        residuals=residuals,
        threshold=threshold,
        max_residual=max_res,
        passed=max_res <= threshold,
    )
