"""Principal symbols of linearized flow operators on the 35-dimensional
perturbation space.

A perturbation of the 3-form pairs a symmetric 2-tensor h with a covector X
(the 3-form moves by h diamond phi + X interior psi).  Every operator here is
the leading-order part of a linearization, written as a map taking (h, X) to
the symmetric and vector parts of the linearized right side, with the
frequency covector xi substituted for derivatives.

Coordinates pack h into 28 slots (diagonal entries first, then off-diagonal
pairs scaled by sqrt 2) followed by the 7 components of X.  At the flat frame
this basis is orthonormal for the tensor inner product, so eigenvalues of the
symmetrized matrices measure the quadratic form directly; at a GL-deformed
frame only basis-independent quantities (ranks, kernel dimensions, spectra of
the maps) are meaningful.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .frame import FramePoint, _E, flat_point

__all__ = [
    "ZeroXi",
    "FlowParams",
    "SymbolMatrix",
    "FSymbolSpectrum",
    "EllipticityReport",
    "SYMBOL_OPS",
    "sym2_basis",
    "pack_pair",
    "unpack_pair",
    "symbol_of",
    "assemble_flow_symbol",
    "deturck_closed_form",
    "f_symbol_spectrum",
    "diffeo_image",
    "principal_angles",
    "kernel_basis",
    "ellipticity_report",
    "region_scan",
    "write_region_csv",
    "write_region_json",
    "homogeneity_residual",
]


class ZeroXi(ValueError):
    """The frequency covector must be nonzero."""


_SQRT2 = float(np.sqrt(2.0))


def sym2_basis() -> np.ndarray:
    """The 28 basis matrices of the symmetric block, shape (28, 7, 7)."""
    mats = np.zeros((28, 7, 7))
    for i in range(7):
        mats[i, i, i] = 1.0
    for n, (i, j) in enumerate(itertools.combinations(range(7), 2)):
        mats[7 + n, i, j] = mats[7 + n, j, i] = 1.0 / _SQRT2
    return mats


_SYM28 = sym2_basis()
_SYM28.setflags(write=False)
_OFF = tuple(itertools.combinations(range(7), 2))

# the 35 probe pairs: 28 pure-h directions followed by 7 pure-X directions
_H35 = np.concatenate([_SYM28, np.zeros((7, 7, 7))], axis=0)
_X35 = np.concatenate([np.zeros((28, 7)), np.eye(7)], axis=0)
_H35.setflags(write=False)
_X35.setflags(write=False)


def pack_pair(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Coordinates of (h, X) in the canonical basis; h may be batched."""
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float)
    diag = h[..., np.arange(7), np.arange(7)]
    rows = np.array([i for i, _ in _OFF])
    cols = np.array([j for _, j in _OFF])
    off = _SQRT2 * h[..., rows, cols]
    return np.concatenate([diag, off, x], axis=-1)


def unpack_pair(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of pack_pair."""
    v = np.asarray(v, dtype=float)
    h = np.zeros(v.shape[:-1] + (7, 7))
    for i in range(7):
        h[..., i, i] = v[..., i]
    for n, (i, j) in enumerate(_OFF):
        h[..., i, j] = h[..., j, i] = v[..., 7 + n] / _SQRT2
    return h, v[..., 28:].copy()


@dataclass(frozen=True)
class FlowParams:
    """Coefficients of the flow right side.

    The 3-form moves by (mu Ric + nu R g + a L_{VT} g + lam F) diamond phi
    plus (b1 divT + b2 divTt) interior psi.  The defaults select the
    negative-Ricci flow coupled to the isometric torsion divergence.
    """

    mu: float = -1.0
    nu: float = 0.0
    a: float = 0.0
    lam: float = 0.0
    b1: float = 1.0
    b2: float = 0.0

    @property
    def ricci_like(self) -> bool:
        return self.mu == -1.0 and self.nu == 0.0

    @property
    def c(self) -> float:
        """Ellipticity margin 1 - (b1 - a - 1)/4 of the gauge-fixed symbol."""
        return 1.0 - 0.25 * (self.b1 - self.a - 1.0)

    @property
    def strongly_elliptic_conditions(self) -> bool:
        """Analytic sufficient conditions for the gauge-fixed flow."""
        return (
            self.ricci_like
            and self.b1 + self.b2 >= 1.0
            and 0.0 <= self.b1 - self.a - 1.0 < 4.0
            and abs(self.lam) < 0.25 * self.c
        )

    @property
    def paper_bound(self) -> float | None:
        """Certified lower bound (c - 4|lam|) on min eig / |xi|^2, if any."""
        if self.strongly_elliptic_conditions:
            return self.c - 4.0 * abs(self.lam)
        return None

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "nu": self.nu,
            "a": self.a,
            "lambda": self.lam,
            "b1": self.b1,
            "b2": self.b2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlowParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


def _prep(fp: FramePoint, xi) -> tuple[np.ndarray, np.ndarray, float]:
    if fp.batch_shape != ():
        raise ValueError("symbol assembly expects a single frame point")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (7,):
        raise ZeroXi(f"xi must have shape (7,), got {xi.shape}")
    if not np.all(np.isfinite(xi)):
        raise ZeroXi("xi must be finite")
    u = fp.ginv @ xi
    n2 = float(xi @ u)
    if n2 <= 0.0:
        raise ZeroXi("xi must be nonzero")
    return xi, u, n2


# Batched value maps: h has shape (B, 7, 7), X has shape (B, 7); outputs keep
# the leading batch axis.  Contracted index pairs are raised with ginv.


def _val_T(fp, xi, u, n2, h, x):
    gh = _E("bc,Bcj->Bbj", fp.ginv, h)
    out = _E("a,Bbj,abk->Bjk", u, gh, fp.phi)
    out += _E("j,Bk->Bjk", xi, x)
    return out


def _val_Tsym(fp, xi, u, n2, h, x):
    t = _val_T(fp, xi, u, n2, h, x)
    return 0.5 * (t + np.swapaxes(t, -1, -2))


def _val_Tskew(fp, xi, u, n2, h, x):
    t = _val_T(fp, xi, u, n2, h, x)
    return 0.5 * (t - np.swapaxes(t, -1, -2))


def _val_VT(fp, xi, u, n2, h, x):
    trg = _E("ab,Bab->B", fp.ginv, h)
    xup = _E("ab,Bb->Ba", fp.ginv, x)
    out = _E("B,k->Bk", trg, xi)
    out -= _E("a,Bak->Bk", u, h)
    out += _E("a,Bb,abk->Bk", u, xup, fp.phi)
    return out


def _val_LieVTg(fp, xi, u, n2, h, x):
    vt = _val_VT(fp, xi, u, n2, h, x)
    return _E("j,Bk->Bjk", xi, vt) + _E("k,Bj->Bjk", xi, vt)


def _val_F(fp, xi, u, n2, h, x):
    hup = _E("ac,Bcd,db->Bab", fp.ginv, h, fp.ginv)
    return 4.0 * _E("p,q,Bab,paj,qbk->Bjk", u, u, hup, fp.phi, fp.phi)


def _val_divT(fp, xi, u, n2, h, x):
    w = _E("bc,Bc->Bb", fp.ginv, _E("m,Bmb->Bb", u, h))
    return _E("a,Bb,abk->Bk", u, w, fp.phi) + n2 * x


def _val_divTt(fp, xi, u, n2, h, x):
    return _E("k,B->Bk", xi, x @ u)


def _val_Ric(fp, xi, u, n2, h, x):
    trg = _E("ab,Bab->B", fp.ginv, h)
    w = _E("a,Bak->Bk", u, h)
    out = -n2 * h
    out += _E("j,Bk->Bjk", xi, w) + _E("k,Bj->Bjk", xi, w)
    out -= _E("j,k,B->Bjk", xi, xi, trg)
    return out


def _val_Rg(fp, xi, u, n2, h, x):
    trg = _E("ab,Bab->B", fp.ginv, h)
    s = -2.0 * n2 * trg + 2.0 * _E("Bab,a,b->B", h, u, u)
    return _E("B,jk->Bjk", s, fp.g)


def _val_B1(fp, xi, u, n2, h, x):
    trg = _E("ab,Bab->B", fp.ginv, h)
    return _E("a,Bak->Bk", u, h) - 0.5 * _E("k,B->Bk", xi, trg)


def _val_B2(fp, xi, u, n2, h, x):
    xup = _E("ab,Bb->Ba", fp.ginv, x)
    return _E("a,Bb,abk->Bk", u, xup, fp.phi)


def _val_tildeB(fp, xi, u, n2, h, x, a=0.0):
    return _val_B1(fp, xi, u, n2, h, x) - a * _val_VT(fp, xi, u, n2, h, x)


def _gauge_correction(fp, xi, u, n2, y):
    """The symbol contribution of the gauge vector field with symbol 2Y:
    adds xi (x) Y + Y (x) xi to the symmetric part and minus the phi-cross
    of xi with Y to the vector part."""
    s = _E("j,Bk->Bjk", xi, y) + _E("k,Bj->Bjk", xi, y)
    yup = _E("ab,Bb->Ba", fp.ginv, y)
    v = -_E("a,Bb,abl->Bl", u, yup, fp.phi)
    return s, v


_TENSOR_OPS = {
    "T": _val_T,
    "Tsym": _val_Tsym,
    "Tskew": _val_Tskew,
    "LieVTg": _val_LieVTg,
    "F": _val_F,
    "Ric": _val_Ric,
    "Rg": _val_Rg,
}

_VECTOR_OPS = {
    "VT": _val_VT,
    "divT": _val_divT,
    "divTt": _val_divTt,
    "B1": _val_B1,
    "B2": _val_B2,
}

SYMBOL_OPS = tuple(sorted(_TENSOR_OPS) + sorted(_VECTOR_OPS) + ["tildeB", "delta_star"])


def symbol_of(op: str, fp: FramePoint, xi, *, a: float = 0.0) -> np.ndarray:
    """Matrix of one operator's principal symbol.

    Tensor-valued operators return shape (49, 35) (the image 2-tensor
    flattened row-major), vector-valued ones (7, 35); delta_star maps a
    covector W to the packed pair and returns (35, 7).  The parameter ``a``
    only affects ``tildeB``.
    """
    xi, u, n2 = _prep(fp, xi)
    if op in _TENSOR_OPS:
        out = _TENSOR_OPS[op](fp, xi, u, n2, _H35, _X35)
        return out.reshape(35, 49).T.copy()
    if op in _VECTOR_OPS:
        out = _VECTOR_OPS[op](fp, xi, u, n2, _H35, _X35)
        return out.T.copy()
    if op == "tildeB":
        out = _val_tildeB(fp, xi, u, n2, _H35, _X35, a=a)
        return out.T.copy()
    if op == "delta_star":
        w = np.eye(7)
        hout = 0.5 * (_E("j,Bk->Bjk", xi, w) + _E("k,Bj->Bjk", xi, w))
        wup = _E("ab,Bb->Ba", fp.ginv, w)
        xout = -0.5 * _E("p,Bq,pqk->Bk", u, wup, fp.phi)
        return pack_pair(hout, xout).T.copy()
    raise ValueError(f"unknown symbol operator {op!r}")


@dataclass(frozen=True)
class SymbolMatrix:
    """A 35x35 assembled flow symbol at one (frame, xi)."""

    xi: np.ndarray
    matrix: np.ndarray
    operator: str
    deturck: bool
    params: FlowParams
    xi_norm2: float

    def symmetrized(self) -> np.ndarray:
        return 0.5 * (self.matrix + self.matrix.T)

    def sym_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.symmetrized())

    def min_sym_eig(self) -> float:
        return float(self.sym_eigenvalues()[0])

    def kernel(self, rtol: float = 1e-8) -> np.ndarray:
        """Orthonormal kernel basis, columns; singular values below
        rtol * sigma_max count as zero."""
        return kernel_basis(self.matrix, rtol=rtol)


def kernel_basis(m: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    _, s, vt = np.linalg.svd(m)
    svals = np.zeros(vt.shape[0])
    svals[: s.size] = s
    cut = rtol * (s[0] if s.size else 0.0)
    return vt[svals <= cut].T.copy()


def _assemble_values(params, fp, xi, u, n2, h, x, deturck):
    s = np.zeros(h.shape)
    if params.mu:
        s += params.mu * _val_Ric(fp, xi, u, n2, h, x)
    if params.nu:
        s += params.nu * _val_Rg(fp, xi, u, n2, h, x)
    if params.a:
        s += params.a * _val_LieVTg(fp, xi, u, n2, h, x)
    if params.lam:
        s += params.lam * _val_F(fp, xi, u, n2, h, x)
    y = np.zeros(x.shape)
    if params.b1:
        y += params.b1 * _val_divT(fp, xi, u, n2, h, x)
    if params.b2:
        y += params.b2 * _val_divTt(fp, xi, u, n2, h, x)
    if deturck:
        bt = _val_tildeB(fp, xi, u, n2, h, x, a=params.a)
        ds, dv = _gauge_correction(fp, xi, u, n2, bt)
        s += ds
        y += dv
    return s, y


def assemble_flow_symbol(
    params: FlowParams, fp: FramePoint | None = None, xi=None, deturck: bool = False
) -> SymbolMatrix:
    """Assemble the full symbol matrix of the flow right side.

    Without the gauge correction the matrix kills the image of delta_star;
    with it the matrix is the gauge-fixed operator whose definiteness the
    ellipticity report measures.
    """
    fp = flat_point() if fp is None else fp
    xi, u, n2 = _prep(fp, xi)
    s, y = _assemble_values(params, fp, xi, u, n2, _H35, _X35, deturck)
    m = pack_pair(s, y).T.copy()
    return SymbolMatrix(
        xi=xi,
        matrix=m,
        operator="Q" if deturck else "P",
        deturck=deturck,
        params=params,
        xi_norm2=n2,
    )


def deturck_closed_form(params: FlowParams, fp: FramePoint, xi) -> np.ndarray:
    """Gauge-fixed symbol of a Ricci-coefficient flow assembled from its
    reduced form: |xi|^2 h on the symmetric block plus the three remaining
    vector-block terms, plus the F contribution."""
    if not params.ricci_like:
        raise ValueError("closed form requires mu = -1, nu = 0")
    xi, u, n2 = _prep(fp, xi)
    h, x = _H35, _X35
    s = n2 * h
    if params.lam:
        s = s + params.lam * _val_F(fp, xi, u, n2, h, x)
    w = _E("bc,Bc->Bb", fp.ginv, _E("m,Bmb->Bb", u, h))
    hterm = _E("a,Bb,abl->Bl", u, w, fp.phi)
    y = (params.b1 - params.a - 1.0) * hterm
    y += (params.b1 - params.a) * n2 * x
    y += (params.b2 + params.a) * _E("l,B->Bl", xi, x @ u)
    return pack_pair(s, y).T.copy()


def diffeo_image(fp: FramePoint, xi) -> np.ndarray:
    """Orthonormal basis (35 x 7) of the diffeomorphism directions: the
    image of the delta_star symbol."""
    cols = symbol_of("delta_star", fp, xi)
    q, r = np.linalg.qr(cols)
    if np.linalg.matrix_rank(r) != 7:
        raise ZeroXi("delta_star symbol is rank deficient")
    return q


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans, descending."""
    return scipy.linalg.subspace_angles(a, b)


@dataclass(frozen=True)
class FSymbolSpectrum:
    """Eigenstructure of the F-term symbol acting as (h, X) -> (F-part, 0)."""

    eigenvalues: np.ndarray
    xi_norm2: float
    counts: dict
    projectors: dict
    kernel_angle: float
    pinned_residual: float
    j_residual: float


def _gram35(fp: FramePoint) -> np.ndarray:
    gh = _E("Aij,ia,jb,Bab->AB", _SYM28, fp.ginv, fp.ginv, _SYM28)
    g = np.zeros((35, 35))
    g[:28, :28] = gh
    g[28:, 28:] = fp.ginv
    return g


def f_symbol_spectrum(fp: FramePoint | None = None, xi=None) -> FSymbolSpectrum:
    """Eigenvalues, multiplicities, and eigenprojectors of the F symbol.

    The map is self-adjoint for the frame inner product, so the spectrum is
    computed as a generalized symmetric problem with the basis Gram matrix.
    Diagnostics: the principal angle between the kernel and the span of
    (xi (x) V + V (x) xi, X); the residual of the pinned conditions
    h(xi) = 0, X = 0 on the nonzero eigenspaces; and the commutation
    defect of the eigenvectors with the contraction operator J.
    """
    fp = flat_point() if fp is None else fp
    xi, u, n2 = _prep(fp, xi)
    s = _val_F(fp, xi, u, n2, _H35, _X35)
    m = pack_pair(s, np.zeros((35, 7))).T
    gram = _gram35(fp)
    gm = gram @ m
    gm = 0.5 * (gm + gm.T)
    vals, vecs = scipy.linalg.eigh(gm, gram)

    tol = 1e-9 * 4.0 * n2
    groups = {
        "zero": np.abs(vals) <= tol,
        "plus": np.abs(vals - 4.0 * n2) <= tol,
        "minus": np.abs(vals + 4.0 * n2) <= tol,
    }
    counts = {k: int(v.sum()) for k, v in groups.items()}
    projectors = {
        k: vecs[:, idx] @ vecs[:, idx].T @ gram for k, idx in groups.items()
    }

    # kernel geometry: diffeomorphism-shaped h plus an arbitrary vector slot
    span = np.zeros((35, 14))
    for i in range(7):
        e = np.zeros(7)
        e[i] = 1.0
        span[:, i] = pack_pair(np.outer(xi, e) + np.outer(e, xi), np.zeros(7))
    span[28:, 7:] = np.eye(7)
    sqg = scipy.linalg.sqrtm(gram).real
    kvecs = vecs[:, groups["zero"]]
    kernel_angle = (
        float(np.max(principal_angles(sqg @ kvecs, sqg @ span)))
        if counts["zero"]
        else np.pi / 2
    )

    pinned = 0.0
    jres = 0.0
    uhat = u / np.sqrt(n2)
    jend = -_E("p,ia,pak->ik", uhat, fp.ginv, fp.phi)
    for key, sign in (("plus", 1.0), ("minus", -1.0)):
        vs = vecs[:, groups[key]]
        if vs.size == 0:
            continue
        h, x = unpack_pair(vs.T)
        scale = max(np.max(np.abs(h)), 1e-300)
        pinned = max(
            pinned,
            float(np.max(np.abs(_E("Bak,a->Bk", h, u)))) / scale,
            float(np.max(np.abs(x))) / scale,
        )
        hend = _E("ia,Bak->Bik", fp.ginv, h)
        comm = _E("Bia,ak->Bik", hend, jend) - sign * _E(
            "ia,Bak->Bik", jend, hend
        )
        jres = max(jres, float(np.max(np.abs(comm))) / scale)

    return FSymbolSpectrum(
        eigenvalues=np.sort(vals),
        xi_norm2=n2,
        counts=counts,
        projectors=projectors,
        kernel_angle=kernel_angle,
        pinned_residual=pinned,
        j_residual=jres,
    )


@dataclass(frozen=True)
class EllipticityReport:
    """Kernel and definiteness summary for one parameter point."""

    kernel_dim: int
    kernel_matches_diffeo: bool
    min_sym_eig: float
    paper_bound: float | None
    classified: str


_DEGENERATE_TOL = 1e-8


def _classify(min_eig_ratio: float, deturck_kernel_dim: int) -> str:
    """Positive-definite form wins; otherwise a gauge-fixed symbol with a
    kernel is degenerate and a kernel-free one with negative directions is
    indefinite."""
    if min_eig_ratio > _DEGENERATE_TOL:
        return "strongly_elliptic_after_deturck"
    if deturck_kernel_dim > 0:
        return "degenerate"
    return "indefinite"


def _unit_xis(n_xi: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    xis = rng.standard_normal((n_xi, 7))
    return xis / np.linalg.norm(xis, axis=1, keepdims=True)


def ellipticity_report(
    params: FlowParams,
    fp: FramePoint | None = None,
    n_xi: int = 50,
    seed: int = 0,
    kernel_xi: int = 8,
) -> EllipticityReport:
    """Measure one parameter point over sampled unit frequencies.

    The kernel dimension and its match against the diffeomorphism image are
    properties of the plain symbol; the minimum symmetrized eigenvalue is
    measured on the gauge-fixed symbol and reported as a ratio to |xi|^2.
    """
    fp = flat_point() if fp is None else fp
    xis = _unit_xis(n_xi, seed)
    kdim = 0
    det_kdim = 0
    matches = True
    min_ratio = np.inf
    for i, xi in enumerate(xis):
        det = assemble_flow_symbol(params, fp, xi, deturck=True)
        min_ratio = min(min_ratio, det.min_sym_eig() / det.xi_norm2)
        if i < kernel_xi:
            det_kdim = max(det_kdim, det.kernel().shape[1])
            plain = assemble_flow_symbol(params, fp, xi, deturck=False)
            ker = plain.kernel()
            kdim = max(kdim, ker.shape[1])
            if ker.shape[1] != 7:
                matches = False
            else:
                ang = np.max(principal_angles(ker, diffeo_image(fp, xi)))
                matches = matches and bool(ang <= 1e-8)
    return EllipticityReport(
        kernel_dim=kdim,
        kernel_matches_diffeo=bool(matches),
        min_sym_eig=float(min_ratio),
        paper_bound=params.paper_bound,
        classified=_classify(float(min_ratio), det_kdim),
    )


def region_scan(
    a_vals,
    b1_vals,
    b2_vals,
    lam_vals,
    fp: FramePoint | None = None,
    n_xi: int = 50,
    seed: int = 0,
    kernel_xi: int = 8,
) -> list[dict]:
    """Classify the Ricci-coefficient flow family over a parameter grid.

    Returns one row per (a, b1, b2, lambda) with the plain-symbol kernel
    dimension, the measured minimum symmetrized eigenvalue of the
    gauge-fixed symbol (as a ratio to |xi|^2, minimum over n_xi sampled
    frequencies), the certified bound where the analytic conditions hold,
    and the classification.
    """
    if n_xi < 1:
        raise ValueError("n_xi must be positive")
    fp = flat_point() if fp is None else fp
    xis = _unit_xis(n_xi, seed)

    # per-frequency component matrices; every parameter enters linearly
    comp = []
    for xi_vec in xis:
        xi, u, n2 = _prep(fp, xi_vec)
        args = (fp, xi, u, n2, _H35, _X35)
        pieces = {
            "ric": _val_Ric(*args),
            "lie": _val_LieVTg(*args),
            "f": _val_F(*args),
        }
        zero_s = np.zeros((35, 7, 7))
        mats = {k: pack_pair(v, np.zeros((35, 7))).T for k, v in pieces.items()}
        mats["divT"] = pack_pair(zero_s, _val_divT(*args)).T
        mats["divTt"] = pack_pair(zero_s, _val_divTt(*args)).T
        cb1 = _gauge_correction(fp, xi, u, n2, _val_B1(*args))
        cvt = _gauge_correction(fp, xi, u, n2, _val_VT(*args))
        mats["corrB1"] = pack_pair(*cb1).T
        mats["corrVT"] = pack_pair(*cvt).T
        mats["n2"] = n2
        comp.append(mats)

    rows = []
    for a, b1, b2, lam in itertools.product(a_vals, b1_vals, b2_vals, lam_vals):
        p = FlowParams(mu=-1.0, nu=0.0, a=a, lam=lam, b1=b1, b2=b2)
        min_ratio = np.inf
        kdim = 0
        det_kdim = 0
        for i, mats in enumerate(comp):
            m_plain = (
                -mats["ric"]
                + a * mats["lie"]
                + lam * mats["f"]
                + b1 * mats["divT"]
                + b2 * mats["divTt"]
            )
            m_det = m_plain + mats["corrB1"] - a * mats["corrVT"]
            sym = 0.5 * (m_det + m_det.T)
            min_ratio = min(
                min_ratio, float(np.linalg.eigvalsh(sym)[0]) / mats["n2"]
            )
            if i < kernel_xi:
                kdim = max(kdim, kernel_basis(m_plain).shape[1])
                det_kdim = max(det_kdim, kernel_basis(m_det).shape[1])
        bound = p.paper_bound
        rows.append(
            {
                "a": float(a),
                "b1": float(b1),
                "b2": float(b2),
                "lambda": float(lam),
                "kernel_dim": kdim,
                "min_eig_ratio": float(min_ratio),
                "paper_bound": None if bound is None else float(bound),
                "class": _classify(float(min_ratio), det_kdim),
            }
        )
    return rows


_REGION_COLUMNS = (
    "a",
    "b1",
    "b2",
    "lambda",
    "kernel_dim",
    "min_eig_ratio",
    "paper_bound",
    "class",
)


def write_region_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_REGION_COLUMNS)
        for row in rows:
            w.writerow(
                ["" if row[c] is None else repr(row[c]) if isinstance(row[c], float) else row[c] for c in _REGION_COLUMNS]
            )


def write_region_json(rows: list[dict], path) -> None:
    with open(path, "w") as fh:
        json.dump({"columns": list(_REGION_COLUMNS), "rows": rows}, fh, indent=1)
        fh.write("\n")


def homogeneity_residual(
    params: FlowParams,
    fp: FramePoint | None = None,
    xi=None,
    deturck: bool = True,
    t: float = 2.0,
) -> float:
    """Relative defect of degree-2 homogeneity: matrix(t xi) vs t^2 matrix(xi)."""
    fp = flat_point() if fp is None else fp
    m1 = assemble_flow_symbol(params, fp, xi, deturck=deturck).matrix
    mt = assemble_flow_symbol(params, fp, np.asarray(xi) * t, deturck=deturck).matrix
    ref = t * t * m1
    denom = max(float(np.max(np.abs(ref))), 1e-300)
    return float(np.max(np.abs(mt - ref))) / denom
