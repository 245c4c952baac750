"""Frame package: positive 3-forms, induced metrics, Hodge star, identity suite."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm

from g2calc.frame import (
    PHI0,
    DenseTensor,
    FramePoint,
    NotPositive,
    Sym,
    flat_point,
    form_inner,
    hodge_star,
    identity_suite,
    levi_civita,
    metric_from_phi,
    random_gl_point,
    symmetry_residual,
    tensor_inner,
)
from oracles import hodge_star_loops, wedge_bilinear_oracle

ALGEBRAIC_TOL = 1e-10
FLAT_TOL = 1e-13


def test_levi_civita_entries():
    eps = levi_civita()
    assert eps[0, 1, 2, 3, 4, 5, 6] == 1.0
    assert eps[1, 0, 2, 3, 4, 5, 6] == -1.0
    assert eps[0, 0, 2, 3, 4, 5, 6] == 0.0
    assert np.count_nonzero(eps) == 5040


def test_phi0_structure_constants():
    # 1-based conventions: phi = e123 + e145 + e167 + e246 - e257 - e347 - e356
    assert PHI0[0, 1, 2] == 1.0
    assert PHI0[1, 0, 2] == -1.0
    assert PHI0[0, 3, 4] == 1.0
    assert PHI0[1, 4, 6] == -1.0
    assert PHI0[2, 4, 5] == -1.0
    assert np.count_nonzero(PHI0) == 42


class TestDenseTensor:
    def test_symmetry_enforced_on_construction(self, rng):
        raw = rng.standard_normal((7, 7))
        t = DenseTensor(raw, Sym.SYM2)
        assert_allclose(t.data, t.data.swapaxes(-1, -2))
        t = DenseTensor(raw, Sym.ALT2)
        assert_allclose(t.data, -t.data.swapaxes(-1, -2))

    def test_alt3_projection(self, rng):
        t = DenseTensor(rng.standard_normal((7, 7, 7)), Sym.ALT3)
        d = t.data
        assert_allclose(d, -np.swapaxes(d, 0, 1), atol=1e-15)
        assert_allclose(d, -np.swapaxes(d, 1, 2), atol=1e-15)

    def test_curvpair_projection(self, rng):
        t = DenseTensor(rng.standard_normal((7,) * 4), Sym.CURVPAIR)
        d = t.data
        assert_allclose(d, -d.transpose(1, 0, 2, 3), atol=1e-15)
        assert_allclose(d, -d.transpose(0, 1, 3, 2), atol=1e-15)
        assert_allclose(d, d.transpose(2, 3, 0, 1), atol=1e-15)

    def test_audit_residual_small(self, rng):
        for sym, rank in [(Sym.SYM2, 2), (Sym.ALT2, 2), (Sym.ALT3, 3), (Sym.ALT4, 4), (Sym.CURVPAIR, 4)]:
            t = DenseTensor(rng.standard_normal((7,) * rank), sym)
            scale = max(np.abs(t.data).max(), 1.0)
            assert t.audit() <= 1e-13 * scale

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            DenseTensor(np.zeros((7, 6)))
        with pytest.raises(ValueError):
            DenseTensor(np.zeros((7,) * 5))
        with pytest.raises(ValueError):
            DenseTensor(np.zeros((7, 7, 7)), Sym.SYM2)

    def test_symmetry_residual_detects_violation(self, rng):
        raw = rng.standard_normal((7, 7, 7, 7))
        assert symmetry_residual(raw, Sym.CURVPAIR) > 0.1


class TestMetricFromPhi:
    def test_flat_model(self, flat):
        assert_allclose(flat.g, np.eye(7), atol=1e-14)
        assert_allclose(flat.vol, 1.0, atol=1e-14)
        assert flat.orientation == -1

    def test_flat_norms(self, flat):
        assert_allclose(tensor_inner(flat.phi, flat.phi, flat.ginv, 3), 42.0, atol=1e-12)
        assert_allclose(tensor_inner(flat.psi, flat.psi, flat.ginv, 4), 168.0, atol=1e-12)

    def test_scaling_law(self, flat):
        lam = 1.37
        fp = metric_from_phi(lam**3 * flat.phi)
        assert_allclose(fp.g, lam**2 * flat.g, atol=1e-12)
        assert_allclose(fp.psi, lam**4 * flat.psi, atol=1e-11)
        assert_allclose(fp.vol, lam**7, atol=1e-12)

    def test_pullback_naturality(self, rng, flat):
        m = expm(0.4 * rng.standard_normal((7, 7)))
        phi = np.einsum("abc,ai,bj,ck->ijk", flat.phi, m, m, m)
        fp = metric_from_phi(phi)
        assert_allclose(fp.g, m.T @ flat.g @ m, atol=1e-12)
        assert_allclose(fp.vol, abs(np.linalg.det(m)), atol=1e-12)
        psi_pulled = np.einsum("abcd,ai,bj,ck,dl->ijkl", flat.psi, m, m, m, m)
        assert_allclose(fp.psi, psi_pulled, atol=1e-11)

    def test_wedge_oracle_random_pullback(self, rng, flat):
        m = expm(0.3 * rng.standard_normal((7, 7)))
        phi = np.einsum("abc,ai,bj,ck->ijk", flat.phi, m, m, m)
        fp = metric_from_phi(phi)
        oracle = wedge_bilinear_oracle(phi)
        # (e_i . phi)^(e_j . phi)^phi = -6 g_ij (orientation * vol) e^{1...7}
        assert_allclose(oracle, -6.0 * fp.g * fp.orientation * fp.vol, atol=ALGEBRAIC_TOL)

    def test_not_positive_on_degenerate(self):
        with pytest.raises(NotPositive):
            metric_from_phi(np.zeros((7, 7, 7)))

    def test_not_positive_on_orientation_mismatch(self, flat):
        with pytest.raises(NotPositive):
            metric_from_phi(flat.phi, orientation=+1)

    def test_not_positive_on_non_positive_form(self, flat):
        # e1 . phi wedge-squares to a sign-indefinite bilinear form
        bad = flat.phi.copy()
        bad[0] = 0.0
        bad[:, 0] = 0.0
        bad[:, :, 0] = 0.0
        with pytest.raises(NotPositive):
            metric_from_phi(bad)

    def test_mixed_orientation_batch_rejected(self, flat):
        refl = np.diag([-1.0, 1, 1, 1, 1, 1, 1])
        flipped = np.einsum("abc,ai,bj,ck->ijk", flat.phi, refl, refl, refl)
        batch = np.stack([flat.phi, flipped])
        with pytest.raises(NotPositive):
            metric_from_phi(batch)

    @settings(max_examples=20, deadline=None)
    @given(lam=st.floats(min_value=0.5, max_value=2.0), seed=st.integers(0, 2**31))
    def test_scaling_property(self, lam, seed):
        rng = np.random.default_rng(seed)
        fp = random_gl_point(rng)
        fps = metric_from_phi(lam**3 * fp.phi)
        assert_allclose(fps.g, lam**2 * fp.g, atol=1e-10 * lam**2)
        assert_allclose(fps.psi, lam**4 * fp.psi, atol=1e-10 * lam**4)
        assert_allclose(fps.vol, lam**7 * fp.vol, atol=1e-10 * lam**7)


class TestHodgeStar:
    def test_star_one_is_oriented_volume(self, gl_point):
        top = hodge_star(np.asarray(1.0), gl_point, k=0)
        eps = levi_civita()
        assert_allclose(top, gl_point.orientation * gl_point.vol * eps, atol=1e-12)

    def test_star_star_is_identity_all_degrees(self, rng, gl_point):
        alt = {2: Sym.ALT2, 3: Sym.ALT3, 4: Sym.ALT4}
        for k in range(8):
            if k <= 4:
                alpha = DenseTensor(rng.standard_normal((7,) * k), alt.get(k, Sym.GENERAL)).data
            else:
                low = DenseTensor(rng.standard_normal((7,) * (7 - k)), alt.get(7 - k, Sym.GENERAL)).data
                alpha = hodge_star(low, gl_point)
            ss = hodge_star(hodge_star(alpha, gl_point), gl_point)
            assert_allclose(ss, alpha, atol=1e-10 * max(1.0, np.abs(alpha).max()))

    def test_star_isometry_form_inner_product(self, rng, gl_point):
        # <a, b> = <*a, *b> for the form inner product (tensor contraction / k!)
        for k in (2, 3):
            sym = {2: Sym.ALT2, 3: Sym.ALT3}[k]
            a = DenseTensor(rng.standard_normal((7,) * k), sym).data
            b = DenseTensor(rng.standard_normal((7,) * k), sym).data
            lhs = form_inner(a, b, gl_point.ginv, k)
            rhs = form_inner(hodge_star(a, gl_point), hodge_star(b, gl_point), gl_point.ginv, 7 - k)
            assert_allclose(lhs, rhs, atol=1e-10)

    def test_star_matches_permutation_oracle(self, rng, gl_point):
        beta = DenseTensor(rng.standard_normal((7, 7)), Sym.ALT2).data
        expect = hodge_star_loops(beta, 2, gl_point.g, gl_point.orientation)
        assert_allclose(hodge_star(beta, gl_point), expect, atol=1e-10)

    def test_psi_is_star_phi(self, gl_batch):
        assert_allclose(hodge_star(gl_batch.phi, gl_batch), gl_batch.psi, atol=1e-11)

    def test_star_wedge_pairing(self, rng, gl_point):
        # a ^ *b = <a,b> vol e^{1...7} up to orientation
        from oracles import wedge_top_coeff

        a = DenseTensor(rng.standard_normal((7, 7, 7)), Sym.ALT3).data
        b = DenseTensor(rng.standard_normal((7, 7, 7)), Sym.ALT3).data
        coeff = wedge_top_coeff(a, hodge_star(b, gl_point))
        inner = form_inner(a, b, gl_point.ginv, 3)
        assert_allclose(coeff, inner * gl_point.orientation * gl_point.vol, atol=1e-10)


class TestIdentitySuite:
    def test_flat_residuals(self, flat):
        rep = identity_suite(flat)
        assert rep.max_residual <= FLAT_TOL
        assert rep.passed

    def test_gl_batch_residuals(self, gl_batch):
        rep = identity_suite(gl_batch)
        assert rep.max_residual <= ALGEBRAIC_TOL
        assert rep.passed
        expected = {
            "phph_2contr", "phph_1contr", "phph_0contr",
            "phps_1contr", "phps_2contr", "phps_3contr",
            "psps_1contr", "psps_2contr", "psps_3contr", "psps_0contr",
            "psi_is_star_phi", "nondegenerate",
        }
        assert set(rep.residuals) == expected

    def test_corrupted_psi_flagged(self, flat):
        psi = flat.psi.copy()
        idx = np.argwhere(psi != 0.0)[0]
        psi[tuple(idx)] = -psi[tuple(idx)]
        bad = FramePoint(phi=flat.phi, psi=psi, g=flat.g, ginv=flat.ginv,
                         vol=flat.vol, orientation=flat.orientation)
        rep = identity_suite(bad)
        assert not rep.passed
        assert rep.max_residual >= 0.5
        assert rep.failing()

    def test_chunking_matches_unchunked(self, gl_batch):
        # contraction paths differ per chunk size, so agreement is only up to
        # accumulated rounding
        r1 = identity_suite(gl_batch, chunk=3)
        r2 = identity_suite(gl_batch, chunk=64)
        for key in r1.residuals:
            assert abs(r1.residuals[key] - r2.residuals[key]) < 1e-12
