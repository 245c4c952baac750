"""Pointwise multilinear algebra of a G2-structure.

A positive 3-form phi on a 7-dimensional vector space determines a metric g,
a volume density, and the dual 4-form psi (the Hodge star of phi).  This
module builds that package (:class:`FramePoint`) from raw components of phi
in an arbitrary coordinate frame and provides the contraction-identity suite
that certifies it.

All tensors are stored with every index down, as dense arrays over 7-valued
indices.  Formulas that contract repeated indices are written with explicit
inverse-metric raises, so they remain valid in non-orthonormal frames.  Every
kernel accepts arbitrary leading batch axes (a grid of points is just a batch)
via einsum ellipsis broadcasting.
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "NotPositive",
    "Sym",
    "DenseTensor",
    "FramePoint",
    "IdentityReport",
    "PHI0",
    "levi_civita",
    "metric_from_phi",
    "flat_point",
    "hodge_star",
    "identity_suite",
    "tensor_inner",
    "form_inner",
    "t2_trace",
    "t2_inner",
    "raise_all",
    "random_gl_point",
]

# Absolute residual above which a structure is considered corrupted rather
# than merely imprecise.
FAULT_THRESHOLD = 1e-6


class NotPositive(ValueError):
    """The 3-form is not positive: it does not induce a Riemannian metric."""


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


@functools.lru_cache(maxsize=1)
def levi_civita() -> np.ndarray:
    """Dense rank-7 permutation symbol, eps[0,1,...,6] = +1. Read-only."""
    eps = np.zeros((7,) * 7)
    for p in itertools.permutations(range(7)):
        eps[p] = _perm_sign(p)
    eps.setflags(write=False)
    return eps


def _alt_fill(terms) -> np.ndarray:
    """Dense alternating tensor from (1-based index tuple, coefficient) pairs."""
    rank = len(terms[0][0])
    out = np.zeros((7,) * rank)
    for idx, coeff in terms:
        base = tuple(i - 1 for i in idx)
        for p in itertools.permutations(range(rank)):
            out[tuple(base[q] for q in p)] = coeff * _perm_sign(p)
    return out


# Flat-model convention: the fixed positive 3-form on R^7.
PHI0 = _alt_fill(
    [
        ((1, 2, 3), 1.0),
        ((1, 4, 5), 1.0),
        ((1, 6, 7), 1.0),
        ((2, 4, 6), 1.0),
        ((2, 5, 7), -1.0),
        ((3, 4, 7), -1.0),
        ((3, 5, 6), -1.0),
    ]
)
PHI0.setflags(write=False)


# Greedy path search with an explicit intermediate-size ceiling: the default
# ceiling (max input size) collapses to naive evaluation once a batch operand
# outgrows the dense rank-7 permutation symbol.
_OPTIMIZE = ("greedy", 2.0e7)


def _E(subscripts: str, *ops) -> np.ndarray:
    return np.einsum(subscripts, *ops, optimize=_OPTIMIZE)


# ---------------------------------------------------------------------------
# symmetry classes


class Sym(enum.Enum):
    """Index-symmetry class of a :class:`DenseTensor`."""

    GENERAL = "general"
    SYM2 = "sym2"
    ALT2 = "alt2"
    ALT3 = "alt3"
    ALT4 = "alt4"
    CURVPAIR = "curvpair"


_SYM_RANK = {
    Sym.SYM2: 2,
    Sym.ALT2: 2,
    Sym.ALT3: 3,
    Sym.ALT4: 4,
    Sym.CURVPAIR: 4,
}


def symmetrize(data: np.ndarray, sym: Sym) -> np.ndarray:
    """Project the trailing indices of ``data`` onto the symmetry class."""
    if sym is Sym.GENERAL:
        return np.asarray(data, dtype=float)
    a = np.asarray(data, dtype=float)
    nb = a.ndim - _SYM_RANK[sym]
    if nb < 0:
        raise ValueError(f"rank too small for symmetry class {sym}")
    batch = list(range(nb))

    def tp(order):
        return np.transpose(a, batch + [nb + q for q in order])

    if sym is Sym.SYM2:
        return 0.5 * (a + tp([1, 0]))
    if sym is Sym.ALT2:
        return 0.5 * (a - tp([1, 0]))
    if sym in (Sym.ALT3, Sym.ALT4):
        k = _SYM_RANK[sym]
        out = np.zeros_like(a)
        for p in itertools.permutations(range(k)):
            out += _perm_sign(p) * tp(list(p))
        return out / math.factorial(k)
    # curvpair: skew in (0,1), skew in (2,3), symmetric under pair exchange
    a = 0.25 * (a - tp([1, 0, 2, 3]) - tp([0, 1, 3, 2]) + tp([1, 0, 3, 2]))

    def tp2(arr, order):
        return np.transpose(arr, batch + [nb + q for q in order])

    return 0.5 * (a + tp2(a, [2, 3, 0, 1]))


def symmetry_residual(data: np.ndarray, sym: Sym) -> float:
    """Max-abs deviation of ``data`` from its projection onto ``sym``."""
    return float(np.abs(np.asarray(data, dtype=float) - symmetrize(data, sym)).max())


@dataclass(frozen=True)
class DenseTensor:
    """A rank-0..4 dense tensor over 7-valued indices with a declared symmetry.

    The symmetry class is enforced on construction by explicit projection;
    :meth:`audit` reports the (near-zero) residual of the stored data.
    """

    data: np.ndarray
    symmetry: Sym = Sym.GENERAL

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim > 4 or any(n != 7 for n in arr.shape):
            raise ValueError(f"expected shape (7,)*rank with rank <= 4, got {arr.shape}")
        if self.symmetry is not Sym.GENERAL and arr.ndim != _SYM_RANK[self.symmetry]:
            raise ValueError(f"rank {arr.ndim} incompatible with {self.symmetry}")
        arr = symmetrize(arr, self.symmetry)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rank(self) -> int:
        return self.data.ndim

    def audit(self) -> float:
        """Residual of the stored data against its symmetry class.

        Bounded by 1e-13 x max|entry| for any tensor built through the
        constructor (the projection is idempotent up to rounding).
        """
        return symmetry_residual(self.data, self.symmetry)


# ---------------------------------------------------------------------------
# raising and inner products


def raise_all(t: np.ndarray, ginv: np.ndarray, rank: int) -> np.ndarray:
    """Raise the last ``rank`` indices of ``t`` with ``ginv``."""
    if rank == 0:
        return t
    if rank > 7:
        raise ValueError(f"rank {rank} out of range 0..7")
    low = "abcdefg"[:rank]
    up = "tuvwxyz"[:rank]
    ops = [t] + [ginv] * rank
    subs = ["..." + low] + ["..." + l + u for l, u in zip(low, up)]
    return _E(",".join(subs) + "->..." + up, *ops)


def tensor_inner(x: np.ndarray, y: np.ndarray, ginv: np.ndarray, rank: int) -> np.ndarray:
    """Full contraction <x, y> with every index pair raised once."""
    low = "abcdefg"[:rank]
    return _E(f"...{low},...{low}->...", x, raise_all(y, ginv, rank))


def form_inner(x: np.ndarray, y: np.ndarray, ginv: np.ndarray, rank: int) -> np.ndarray:
    """Inner product of k-forms: tensor contraction divided by k!."""
    return tensor_inner(x, y, ginv, rank) / math.factorial(rank)


def t2_trace(a: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    return _E("...ij,...ij->...", a, ginv)


def t2_inner(a: np.ndarray, b: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    return tensor_inner(a, b, ginv, 2)


# ---------------------------------------------------------------------------
# the frame package


@dataclass(frozen=True)
class FramePoint:
    """The pointwise package (phi, psi, g, g^-1, vol) of a G2-structure.

    ``orientation`` is the sign of the coordinate frame with respect to the
    orientation induced by phi: the oriented volume form is
    orientation * vol * e^{1...7}.  Arrays may carry leading batch axes; all
    five fields share the same batch shape.
    """

    phi: np.ndarray
    psi: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    vol: np.ndarray
    orientation: int = 1

    @property
    def batch_shape(self) -> tuple:
        return self.phi.shape[:-3]

    def point(self, idx) -> "FramePoint":
        """Extract a single point from a batched FramePoint."""
        return FramePoint(
            phi=self.phi[idx],
            psi=self.psi[idx],
            g=self.g[idx],
            ginv=self.ginv[idx],
            vol=self.vol[idx],
            orientation=self.orientation,
        )

    def with_phi(self, phi: np.ndarray) -> "FramePoint":
        """Rebuild the full package from a new phi, keeping the orientation."""
        return metric_from_phi(phi, orientation=self.orientation)


def _wedge_bilinear(phi: np.ndarray) -> np.ndarray:
    """Coefficient of e^{1...7} in (e_i . phi) ^ (e_j . phi) ^ phi."""
    eps = levi_civita()
    # 1/(2! 2! 3!) times the full antisymmetric contraction
    return _E("...iab,...jcd,...efg,abcdefg->...ij", phi, phi, phi, eps) / 24.0


def metric_from_phi(phi: np.ndarray, orientation: int | None = None) -> FramePoint:
    """Build the FramePoint induced by a positive 3-form.

    The defining identity (X . phi) ^ (Y . phi) ^ phi = -6 g(X,Y) vol is
    inverted in closed form: with B the density-valued bilinear form above and
    C = -B/6, one has C = s g sqrt(det g) where s = +-1 is the orientation of
    the coordinate frame, so g = sC / (det sC)^{1/9}.

    orientation: +1 or -1 asserts the frame orientation (raising NotPositive
    on mismatch); None auto-detects it from sign(det C), which must be uniform
    across the batch.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape[-3:] != (7, 7, 7):
        raise ValueError(f"phi must have trailing shape (7,7,7), got {phi.shape}")
    c = -_wedge_bilinear(phi) / 6.0
    detc = np.asarray(np.linalg.det(c))
    if orientation is None:
        signs = np.sign(detc)
        if np.any(signs == 0.0):
            raise NotPositive("degenerate 3-form: det of induced bilinear form is 0")
        first = float(np.ravel(signs)[0])
        if np.any(signs != first):
            raise NotPositive("orientation sign is not uniform across the batch")
        orientation = int(first)
    elif orientation not in (1, -1):
        raise ValueError("orientation must be +1, -1 or None")
    cpos = orientation * c
    detcpos = orientation * detc  # det(sC) = s^7 det C = s det C
    if np.any(detcpos <= 0.0):
        raise NotPositive("3-form is not positive for the requested orientation")
    scale = detcpos ** (1.0 / 9.0)
    g = cpos / scale[..., None, None]
    eigs = np.linalg.eigvalsh(g)
    if np.any(eigs <= 0.0):
        raise NotPositive("induced bilinear form has a non-positive eigenvalue")
    ginv = np.linalg.inv(g)
    vol = scale  # sqrt(det g) = (det sC)^{1/9}
    psi = _hodge_star_raw(phi, 3, ginv, vol, orientation)
    return FramePoint(phi=phi, psi=psi, g=g, ginv=ginv, vol=vol, orientation=orientation)


@functools.lru_cache(maxsize=1)
def flat_point() -> FramePoint:
    """The flat-model FramePoint (g = identity, vol = 1)."""
    fp = metric_from_phi(PHI0)
    for arr in (fp.phi, fp.psi, fp.g, fp.ginv, fp.vol):
        arr.setflags(write=False)
    return fp


def _hodge_star_raw(
    alpha: np.ndarray, k: int, ginv: np.ndarray, vol: np.ndarray, orientation: int
) -> np.ndarray:
    eps = levi_civita()
    up, out = "abcdefg"[:k], "abcdefg"[k:]
    raised = raise_all(alpha, ginv, k)
    core = _E(f"...{up},{up}{out}->...{out}", raised, eps) if k else _E(
        f"...,{out}->...{out}", alpha, eps
    )
    volb = vol[(...,) + (None,) * (7 - k)]
    return orientation * volb * core / math.factorial(k)


def hodge_star(form: np.ndarray, fp: FramePoint, k: int | None = None) -> np.ndarray:
    """Hodge star of a k-form field with respect to (g, vol, orientation).

    k is inferred from the batch shape of ``fp`` when omitted.  Satisfies
    star(star(form)) = +form in every degree (dimension 7, Riemannian).
    """
    form = np.asarray(form, dtype=float)
    if k is None:
        k = form.ndim - len(fp.batch_shape)
    if not 0 <= k <= 7:
        raise ValueError(f"form degree {k} out of range 0..7")
    return _hodge_star_raw(form, k, fp.ginv, fp.vol, fp.orientation)


# ---------------------------------------------------------------------------
# contraction-identity suite


@dataclass(frozen=True)
class IdentityReport:
    """Max-abs residuals of the contraction identities, per named line."""

    residuals: dict
    threshold: float
    max_residual: float
    passed: bool

    def failing(self) -> list:
        return sorted(k for k, v in self.residuals.items() if v > self.threshold)


def _chunk_indices(n: int, chunk: int):
    for lo in range(0, n, chunk):
        yield slice(lo, min(lo + chunk, n))


def _psps_triple_residual(phi, psi, g, ginv) -> float:
    """Max-abs residual of the single-contraction psi-psi identity.

    The 7^6-entry comparison dominates the whole suite, so the left side is
    evaluated as a batched matmul and the right side accumulated in place
    from broadcasting products, reusing one scratch buffer.
    """
    n = phi.shape[0]
    m1 = psi.reshape(n, 343, 7)
    m2 = _E("nabcd,ndl->nabcl", psi, ginv).reshape(n, 343, 7)
    res = np.matmul(m1, np.swapaxes(m2, -1, -2)).reshape(n, 7, 7, 7, 7, 7, 7)
    tmp = np.empty_like(res)
    # d_xyuv = g_xu g_yv - g_xv g_yu
    d = _E("nxu,nyv->nxyuv", g, g)
    d = d - d.transpose(0, 1, 2, 4, 3)
    e1 = d - psi
    na = np.newaxis
    terms = [
        # sign, factor on (i,a)-like axes, factor on the complementary axes
        (+1, g[:, :, na, na, :, na, na], e1[:, na, :, :, na, :, :]),
        (+1, g[:, :, na, na, na, :, na], d.transpose(0, 1, 2, 4, 3)[:, na, :, :, :, na, :]),
        (+1, g[:, :, na, na, na, na, :], d[:, na, :, :, :, :, na]),
        (-1, phi.transpose(0, 2, 3, 1)[:, na, :, :, :, na, na], phi[:, :, na, na, na, :, :]),
        (-1, phi.transpose(0, 1, 3, 2)[:, :, na, :, :, na, na], phi[:, na, :, na, na, :, :]),
        (-1, phi[:, :, :, na, :, na, na], phi[:, na, na, :, na, :, :]),
        (-1, g[:, na, :, na, :, na, na], psi.transpose(0, 2, 1, 3, 4)[:, :, na, :, na, :, :]),
        (-1, g[:, na, na, :, :, na, na], psi[:, :, :, na, na, :, :]),
        (+1, g[:, na, na, na, :, :, na], psi[:, :, :, :, na, na, :]),
        (-1, g[:, na, na, na, :, na, :], psi[:, :, :, :, na, :, na]),
    ]
    for sign, f1, f2 in terms:
        np.multiply(f1, f2, out=tmp)
        if sign > 0:
            np.subtract(res, tmp, out=res)
        else:
            np.add(res, tmp, out=res)
    np.abs(res, out=res)
    return float(res.max())


def _identity_residuals_single(fp: FramePoint) -> dict:
    phi, psi, g, ginv = fp.phi, fp.psi, fp.g, fp.ginv
    out = {}

    def rec(name, lhs, rhs):
        out[name] = float(np.abs(lhs - rhs).max())

    gg = lambda s: _E(s, g, g)
    # phi-phi contractions
    rec(
        "phph_2contr",
        _E("...ijk,...abc,...kc->...ijab", phi, phi, ginv),
        gg("...ia,...jb->...ijab") - gg("...ib,...ja->...ijab") - psi,
    )
    rec(
        "phph_1contr",
        _E("...ijk,...abc,...jb,...kc->...ia", phi, phi, ginv, ginv),
        6.0 * g,
    )
    rec("phph_0contr", tensor_inner(phi, phi, ginv, 3), 42.0)
    # phi-psi contractions
    gp = lambda s: _E(s, g, phi)
    rec(
        "phps_1contr",
        _E("...ijk,...abcd,...kd->...ijabc", phi, psi, ginv),
        gp("...ia,...jbc->...ijabc")
        + gp("...ib,...ajc->...ijabc")
        + gp("...ic,...abj->...ijabc")
        - gp("...ja,...ibc->...ijabc")
        - gp("...jb,...aic->...ijabc")
        - gp("...jc,...abi->...ijabc"),
    )
    rec(
        "phps_2contr",
        _E("...ijk,...abcd,...jc,...kd->...iab", phi, psi, ginv, ginv),
        -4.0 * phi,
    )
    rec(
        "phps_3contr",
        _E("...ijk,...abcd,...ib,...jc,...kd->...a", phi, psi, ginv, ginv, ginv),
        np.zeros(fp.batch_shape + (7,)),
    )
    # psi-psi contractions
    batch = fp.batch_shape
    n = int(np.prod(batch)) if batch else 1
    out["psps_1contr"] = _psps_triple_residual(
        phi.reshape(n, 7, 7, 7),
        psi.reshape(n, 7, 7, 7, 7),
        g.reshape(n, 7, 7),
        ginv.reshape(n, 7, 7),
    )
    rec(
        "psps_2contr",
        _E("...ijkl,...abcd,...kc,...ld->...ijab", psi, psi, ginv, ginv),
        4.0 * gg("...ia,...jb->...ijab") - 4.0 * gg("...ib,...ja->...ijab") - 2.0 * psi,
    )
    rec(
        "psps_3contr",
        _E("...ijkl,...abcd,...jb,...kc,...ld->...ia", psi, psi, ginv, ginv, ginv),
        24.0 * g,
    )
    rec("psps_0contr", tensor_inner(psi, psi, ginv, 4), 168.0)
    # psi is the Hodge star of phi
    rec("psi_is_star_phi", psi, _hodge_star_raw(phi, 3, fp.ginv, fp.vol, fp.orientation))
    # nondegeneracy: (e_i . phi)^(e_j . phi)^phi = -6 g_ij (oriented vol)
    rec(
        "nondegenerate",
        _wedge_bilinear(phi),
        -6.0 * g * (fp.orientation * fp.vol)[..., None, None],
    )
    return out


def identity_suite(fp: FramePoint, threshold: float = FAULT_THRESHOLD, chunk: int = 16) -> IdentityReport:
    """Evaluate every line of the contraction-identity blocks on ``fp``.

    Returns per-line max-abs residuals over the whole batch.  A valid
    FramePoint scores <= 1e-10 on every line; residuals above ``threshold``
    flag the structure as corrupted.
    """
    batch = fp.batch_shape
    if batch == ():
        residuals = _identity_residuals_single(fp)
    else:
        n = int(np.prod(batch))
        flat = FramePoint(
            phi=fp.phi.reshape(n, 7, 7, 7),
            psi=fp.psi.reshape(n, 7, 7, 7, 7),
            g=fp.g.reshape(n, 7, 7),
            ginv=fp.ginv.reshape(n, 7, 7),
            vol=fp.vol.reshape(n),
            orientation=fp.orientation,
        )
        residuals: dict = {}
        for sl in _chunk_indices(n, chunk):
            part = _identity_residuals_single(flat.point(sl))
            for key, val in part.items():
                residuals[key] = max(residuals.get(key, 0.0), val)
    max_res = max(residuals.values())
    return IdentityReport(
        residuals=residuals,
        threshold=threshold,
        max_residual=max_res,
        passed=max_res <= threshold,
    )


def random_gl_point(rng: np.random.Generator, scale: float = 0.3, n: int | None = None) -> FramePoint:
    """FramePoint(s) for the pullback of the flat phi by random GL(7) matrices.

    The matrices are exp(scale * Z) with Z standard normal, so they stay in
    the identity component and the pulled-back form is always positive.
    """
    shape = (7, 7) if n is None else (n, 7, 7)
    m = np.asarray(_expm(scale * rng.standard_normal(shape)))
    phi = _E("...abc,...ai,...bj,...ck->...ijk", PHI0, m, m, m)
    return metric_from_phi(phi)


def _expm(a: np.ndarray) -> np.ndarray:
    from scipy.linalg import expm

    if a.ndim == 2:
        return expm(a)
    out = np.empty_like(a)
    flat = a.reshape(-1, a.shape[-2], a.shape[-1])
    outf = out.reshape(-1, a.shape[-2], a.shape[-1])
    for i in range(flat.shape[0]):
        outf[i] = expm(flat[i])
    return out
