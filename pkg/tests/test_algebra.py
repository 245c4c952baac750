"""Diamond products, P and V operators, 2-tensor and 3/4-form decompositions."""
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from g2calc.algebra import (
    circledcirc,
    cross,
    decompose_form3,
    decompose_form4,
    decompose_tensor2,
    diamond,
    form2_fourteen_part,
    form2_seven_part,
    interior7,
    p_op,
    v_op,
)
from g2calc.frame import random_gl_point, raise_all, t2_inner, t2_trace, tensor_inner
from oracles import circledcirc_loops

TOL = 1e-10
RANK_CUT = 1e-8


def skew(a):
    return 0.5 * (a - np.swapaxes(a, -1, -2))


def sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def operator_matrix(op, dim_in=49):
    """Matrix of a linear map on 2-tensors in the flattened coordinate basis."""
    cols = []
    for a in range(dim_in):
        e = np.zeros(dim_in)
        e[a] = 1.0
        cols.append(op(e.reshape(7, 7)).ravel())
    return np.array(cols).T


def svd_rank(m, cut=RANK_CUT):
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > cut * s[0]))


class TestPandV:
    def test_p_spectrum_on_2forms(self, gl_point):
        # generalized eigenproblem in the coordinate basis of Lambda^2
        pairs = [(i, j) for i in range(7) for j in range(i + 1, 7)]
        basis = []
        for i, j in pairs:
            b = np.zeros((7, 7))
            b[i, j], b[j, i] = 1.0, -1.0
            basis.append(b)
        flat_basis = np.array([b.ravel() for b in basis]).T
        m = np.zeros((21, 21))
        gram = np.zeros((21, 21))
        for a, ba in enumerate(basis):
            coef, *_ = np.linalg.lstsq(flat_basis, p_op(ba, gl_point).ravel(), rcond=None)
            m[:, a] = coef
            for b, bb in enumerate(basis):
                gram[b, a] = t2_inner(bb, ba, gl_point.ginv)
        evals = np.sort(scipy.linalg.eigh(gram @ m, gram, eigvals_only=True))
        assert_allclose(evals[:7], -4.0, atol=TOL)
        assert_allclose(evals[7:], 2.0, atol=TOL)

    def test_p_squared_identity(self, rng, gl_point):
        beta = skew(rng.standard_normal((7, 7)))
        lhs = p_op(p_op(beta, gl_point), gl_point)
        assert_allclose(lhs, 8.0 * beta - 2.0 * p_op(beta, gl_point), atol=TOL)

    def test_p_self_adjoint(self, rng, gl_point):
        b1 = skew(rng.standard_normal((7, 7)))
        b2 = skew(rng.standard_normal((7, 7)))
        assert_allclose(
            t2_inner(p_op(b1, gl_point), b2, gl_point.ginv),
            t2_inner(b1, p_op(b2, gl_point), gl_point.ginv),
            atol=TOL,
        )

    def test_p_kills_symmetric(self, rng, gl_point):
        assert_allclose(p_op(sym(rng.standard_normal((7, 7))), gl_point), 0.0, atol=TOL)

    def test_p_eigenvalue_on_seven_part(self, rng, gl_point):
        xphi = interior7(rng.standard_normal(7), gl_point)
        assert_allclose(p_op(xphi, gl_point), -4.0 * xphi, atol=TOL)

    def test_v_kills_symmetric_and_14(self, rng, gl_point):
        assert_allclose(v_op(sym(rng.standard_normal((7, 7))), gl_point), 0.0, atol=TOL)
        d = decompose_tensor2(rng.standard_normal((7, 7)), gl_point)
        assert_allclose(v_op(d.skew14, gl_point), 0.0, atol=TOL)

    def test_v_of_p(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        assert_allclose(
            v_op(p_op(skew(a), gl_point), gl_point), -4.0 * v_op(a, gl_point), atol=TOL
        )

    def test_v_of_interior7(self, rng, gl_point):
        x = rng.standard_normal(7)
        assert_allclose(v_op(interior7(x, gl_point), gl_point), 6.0 * x, atol=TOL)

    def test_seven_pairing(self, rng, gl_point):
        x, y = rng.standard_normal(7), rng.standard_normal(7)
        lhs = t2_inner(interior7(x, gl_point), interior7(y, gl_point), gl_point.ginv)
        rhs = 6.0 * np.einsum("a,ab,b->", x, gl_point.ginv, y)
        assert_allclose(lhs, rhs, atol=TOL)

    def test_form2_projections(self, rng, gl_point):
        beta = skew(rng.standard_normal((7, 7)))
        b7 = form2_seven_part(beta, gl_point)
        b14 = form2_fourteen_part(beta, gl_point)
        assert_allclose(b7 + b14, beta, atol=TOL)
        assert_allclose(p_op(b7, gl_point), -4.0 * b7, atol=TOL)
        assert_allclose(p_op(b14, gl_point), 2.0 * b14, atol=TOL)

    def test_lambda2_projector_ranks(self, gl_point):
        p7 = operator_matrix(lambda b: form2_seven_part(skew(b), gl_point))
        p14 = operator_matrix(lambda b: form2_fourteen_part(skew(b), gl_point))
        assert svd_rank(p7) == 7
        assert svd_rank(p14) == 14


class TestDecomposeTensor2:
    def test_reassembly_and_orthogonality(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        d = decompose_tensor2(a, gl_point)
        assert_allclose(d.reassemble(), a, atol=TOL)
        parts = list(d.parts().values())
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(t2_inner(parts[i], parts[j], gl_point.ginv)) < TOL

    def test_metric_decomposes_to_trace(self, gl_point):
        d = decompose_tensor2(gl_point.g, gl_point)
        assert_allclose(d.trace, 7.0, atol=TOL)
        assert_allclose(d.sym0, 0.0, atol=TOL)
        assert_allclose(d.vec7, 0.0, atol=TOL)
        assert_allclose(d.skew14, 0.0, atol=TOL)

    def test_interior7_decomposes_to_vec7(self, rng, gl_point):
        x = rng.standard_normal(7)
        d = decompose_tensor2(interior7(x, gl_point), gl_point)
        assert_allclose(d.trace, 0.0, atol=TOL)
        assert_allclose(d.sym0, 0.0, atol=TOL)
        assert_allclose(d.skew14, 0.0, atol=TOL)
        assert_allclose(d.vec7, 6.0 * x, atol=TOL)

    def test_skew14_has_zero_phi_contraction(self, rng, gl_point):
        d = decompose_tensor2(rng.standard_normal((7, 7)), gl_point)
        assert_allclose(v_op(d.skew14, gl_point), 0.0, atol=TOL)

    def test_projector_ranks(self, gl_point):
        ops = {
            "trace": lambda a: decompose_tensor2(a, gl_point).trace_part(),
            "sym0": lambda a: decompose_tensor2(a, gl_point).sym0,
            "seven": lambda a: decompose_tensor2(a, gl_point).seven(),
            "skew14": lambda a: decompose_tensor2(a, gl_point).skew14,
        }
        ranks = {k: svd_rank(operator_matrix(op)) for k, op in ops.items()}
        assert ranks == {"trace": 1, "sym0": 27, "seven": 7, "skew14": 14}

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_reassembly_property(self, seed):
        rng = np.random.default_rng(seed)
        fp = random_gl_point(rng)
        a = rng.standard_normal((7, 7))
        d = decompose_tensor2(a, fp)
        assert np.abs(d.reassemble() - a).max() < TOL


class TestDiamond:
    def test_metric_acts_by_degree(self, rng, gl_point):
        beta = skew(rng.standard_normal((7, 7)))
        for k, sig in ((2, beta), (3, gl_point.phi), (4, gl_point.psi)):
            assert_allclose(diamond(gl_point.g, sig, gl_point), k * sig, atol=TOL)

    def test_14_part_acts_trivially(self, rng, gl_point):
        d = decompose_tensor2(rng.standard_normal((7, 7)), gl_point)
        assert_allclose(diamond(d.skew14, gl_point.phi, gl_point), 0.0, atol=TOL)
        assert_allclose(diamond(d.skew14, gl_point.psi, gl_point), 0.0, atol=TOL)

    def test_diamond_phi_flat_reference(self, flat):
        assert_allclose(diamond(flat.g, flat.phi, flat), 3.0 * flat.phi, atol=1e-14)

    def test_diamond_inner_product_coefficients(self, rng, gl_point):
        a, b = rng.standard_normal((7, 7)), rng.standard_normal((7, 7))
        da, db = decompose_tensor2(a, gl_point), decompose_tensor2(b, gl_point)
        lhs3 = tensor_inner(
            diamond(a, gl_point.phi, gl_point), diamond(b, gl_point.phi, gl_point), gl_point.ginv, 3
        )
        rhs3 = (
            54.0 / 7.0 * da.trace * db.trace
            + 12.0 * t2_inner(da.sym0, db.sym0, gl_point.ginv)
            + 36.0 * t2_inner(da.seven(), db.seven(), gl_point.ginv)
        )
        assert_allclose(lhs3, rhs3, atol=1e-9)
        lhs4 = tensor_inner(
            diamond(a, gl_point.psi, gl_point), diamond(b, gl_point.psi, gl_point), gl_point.ginv, 4
        )
        rhs4 = (
            384.0 / 7.0 * da.trace * db.trace
            + 48.0 * t2_inner(da.sym0, db.sym0, gl_point.ginv)
            + 144.0 * t2_inner(da.seven(), db.seven(), gl_point.ginv)
        )
        assert_allclose(lhs4, rhs4, atol=1e-9)

    def test_g_diamond_phi_norm(self, gl_point):
        gphi = diamond(gl_point.g, gl_point.phi, gl_point)
        assert_allclose(tensor_inner(gphi, gphi, gl_point.ginv, 3), 378.0, atol=1e-9)

    def test_interior_psi_as_diamond(self, rng, gl_point):
        # X . psi = A diamond phi with A = -1/3 X . phi
        x = rng.standard_normal(7)
        xpsi = np.einsum("q,qp,pabc->abc", x, gl_point.ginv, gl_point.psi)
        a = -interior7(x, gl_point) / 3.0
        assert_allclose(diamond(a, gl_point.phi, gl_point), xpsi, atol=TOL)

    def test_interior_phi_diamond_phi(self, rng, gl_point):
        # (X . phi) diamond phi = -3 X . psi
        x = rng.standard_normal(7)
        xpsi = np.einsum("q,qp,pabc->abc", x, gl_point.ginv, gl_point.psi)
        lhs = diamond(interior7(x, gl_point), gl_point.phi, gl_point)
        assert_allclose(lhs, -3.0 * xpsi, atol=TOL)

    def test_lambda3_projector_ranks(self, gl_point):
        # images of the three parts of A under A -> A diamond phi
        def proj(kind):
            def op(a):
                d = decompose_tensor2(a, gl_point)
                piece = {"trace": d.trace_part(), "sym0": d.sym0, "seven": d.seven()}[kind]
                return diamond(piece, gl_point.phi, gl_point)

            mat = []
            for idx in range(49):
                e = np.zeros(49)
                e[idx] = 1.0
                mat.append(op(e.reshape(7, 7)).ravel())
            return np.array(mat).T

        assert svd_rank(proj("trace")) == 1
        assert svd_rank(proj("seven")) == 7
        assert svd_rank(proj("sym0")) == 27


class TestFormDecomps:
    def test_form3_round_trip(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        gamma = diamond(a, gl_point.phi, gl_point)
        f3 = decompose_form3(gamma, gl_point)
        assert_allclose(f3.reassemble_form(), gamma, atol=TOL)
        assert_allclose(f3.coeffs.skew14, 0.0, atol=TOL)

    def test_form3_of_phi(self, gl_point):
        f3 = decompose_form3(gl_point.phi, gl_point)
        assert_allclose(f3.coeffs.reassemble(), gl_point.g / 3.0, atol=TOL)

    def test_form3_of_interior_psi(self, rng, gl_point):
        x = rng.standard_normal(7)
        xpsi = np.einsum("q,qp,pabc->abc", x, gl_point.ginv, gl_point.psi)
        f3 = decompose_form3(xpsi, gl_point)
        assert_allclose(f3.coeffs.reassemble(), -interior7(x, gl_point) / 3.0, atol=TOL)

    def test_form4_round_trip(self, rng, gl_point):
        b = rng.standard_normal((7, 7))
        eta = diamond(b, gl_point.psi, gl_point)
        f4 = decompose_form4(eta, gl_point)
        assert_allclose(f4.reassemble_form(), eta, atol=TOL)

    def test_form4_of_psi(self, gl_point):
        f4 = decompose_form4(gl_point.psi, gl_point)
        assert_allclose(f4.coeffs.reassemble(), gl_point.g / 4.0, atol=TOL)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_round_trip_property(self, seed):
        rng = np.random.default_rng(seed)
        fp = random_gl_point(rng)
        a = rng.standard_normal((7, 7))
        gamma = diamond(a, fp.phi, fp)
        assert np.abs(decompose_form3(gamma, fp).reassemble_form() - gamma).max() < TOL
        eta = diamond(a, fp.psi, fp)
        assert np.abs(decompose_form4(eta, fp).reassemble_form() - eta).max() < TOL


class TestCircledcirc:
    def test_matches_loop_oracle(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        b = rng.standard_normal((7, 7))
        au = raise_all(a, gl_point.ginv, 2)
        bu = raise_all(b, gl_point.ginv, 2)
        expect = circledcirc_loops(au, bu, gl_point.phi)
        assert_allclose(circledcirc(a, b, gl_point), expect, atol=TOL)

    def test_trace_identity(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        aa = circledcirc(a, a, gl_point)
        tr = t2_trace(aa, gl_point.ginv)
        d = decompose_tensor2(a, gl_point)
        at = np.swapaxes(a, -1, -2)
        expect = (
            d.trace**2
            - t2_inner(a, at, gl_point.ginv)
            + t2_inner(a, p_op(skew(a), gl_point), gl_point.ginv)
        )
        assert_allclose(tr, expect, atol=1e-9)

    def test_p_of_circledcirc(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        ginv = gl_point.ginv
        aa = circledcirc(a, a, gl_point)
        va = v_op(a, gl_point)
        at = np.swapaxes(a, -1, -2)
        a_mixed = np.einsum("ia,ap->ip", a, ginv)
        at_mixed = np.einsum("ia,ap->ip", at, ginv)
        a2 = np.einsum("ip,pj->ij", a_mixed, a)
        pa = p_op(skew(a), gl_point)
        pa_a = np.einsum("ip,pj->ij", np.einsum("ia,ap->ip", pa, ginv), a)
        tra = t2_trace(a, ginv)
        at_va = np.einsum("ip,p->i", at_mixed, va)
        expect = (
            4.0 * tra * skew(a)
            - 4.0 * skew(a2)
            - 4.0 * skew(pa_a)
            - 2.0 * interior7(at_va, gl_point)
        )
        assert_allclose(p_op(skew(aa), gl_point), expect, atol=1e-9)

    def test_v_of_circledcirc(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        ginv = gl_point.ginv
        aa = circledcirc(a, a, gl_point)
        va = v_op(a, gl_point)
        a_mixed = np.einsum("ia,ap->ip", a, ginv)
        at_mixed = np.einsum("ia,ap->ip", np.swapaxes(a, -1, -2), ginv)
        a2 = np.einsum("ip,pj->ij", a_mixed, a)
        tra = t2_trace(a, ginv)
        expect = (
            2.0 * np.einsum("ip,p->i", a_mixed, va)
            + 2.0 * np.einsum("ip,p->i", at_mixed, va)
            - 2.0 * tra * va
            + 2.0 * v_op(a2, gl_point)
        )
        assert_allclose(v_op(aa, gl_point), expect, atol=1e-9)

    def test_g_circledcirc_g(self, gl_point):
        gg = circledcirc(gl_point.g, gl_point.g, gl_point)
        assert_allclose(t2_trace(gg, gl_point.ginv), 42.0, atol=1e-9)

    def test_seven_fourteen_parts(self, rng, gl_point):
        a = rng.standard_normal((7, 7))
        ginv = gl_point.ginv
        aa = circledcirc(a, a, gl_point)
        daa = decompose_tensor2(aa, gl_point)
        d = decompose_tensor2(a, gl_point)
        va = v_op(a, gl_point)
        a_mixed = np.einsum("ia,ap->ip", a, ginv)
        at_mixed = np.einsum("ia,ap->ip", np.swapaxes(a, -1, -2), ginv)
        a2 = np.einsum("ip,pj->ij", a_mixed, a)
        tra = t2_trace(a, ginv)
        y = (
            np.einsum("ip,p->i", a_mixed, va) / 3.0
            + np.einsum("ip,p->i", at_mixed, va) / 3.0
            - tra * va / 3.0
            + v_op(a2, gl_point) / 3.0
        )
        assert_allclose(daa.seven(), interior7(y, gl_point), atol=1e-9)
        pa = p_op(skew(a), gl_point)
        pa_a = np.einsum("ip,pj->ij", np.einsum("ia,ap->ip", pa, ginv), a)
        d2 = decompose_tensor2(a2, gl_point)
        dpa = decompose_tensor2(pa_a, gl_point)
        expect14 = 2.0 * tra * d.skew14 - 2.0 * d2.skew14 - 2.0 * dpa.skew14
        assert_allclose(daa.skew14, expect14, atol=1e-9)


class TestCross:
    def test_bilinear_antisymmetric(self, rng, gl_point):
        x, y = rng.standard_normal(7), rng.standard_normal(7)
        assert_allclose(cross(x, y, gl_point), -cross(y, x, gl_point), atol=TOL)
        assert_allclose(
            cross(2.0 * x + y, y, gl_point), 2.0 * cross(x, y, gl_point), atol=TOL
        )

    def test_pairing_with_phi(self, rng, gl_point):
        x, y, z = (rng.standard_normal(7) for _ in range(3))
        ginv = gl_point.ginv
        lhs = np.einsum("k,kz,z->", cross(x, y, gl_point), ginv, z)
        rhs = np.einsum("i,ix,j,jy,k,kz,xyz->", x, ginv, y, ginv, z, ginv, gl_point.phi)
        assert_allclose(lhs, rhs, atol=TOL)

    def test_norm_identity(self, rng, gl_point):
        x, y = rng.standard_normal(7), rng.standard_normal(7)
        ginv = gl_point.ginv
        xy = cross(x, y, gl_point)
        n2 = xy @ ginv @ xy
        expect = (x @ ginv @ x) * (y @ ginv @ y) - (x @ ginv @ y) ** 2
        assert_allclose(n2, expect, atol=1e-9)
