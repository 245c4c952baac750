"""Grid discretization: stencil accuracy, the connection, and curvature."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from g2calc.fields import (
    GridSpec,
    StructureField,
    christoffel,
    curvature,
    fourier_scalar,
    generate_field,
    lie_derivative_phi,
    nabla,
    nabla_g_residual,
    partial_on_grid,
    partial_tensor,
    ricci_identity_residual,
    second_bianchi_residual,
)
from g2calc.frame import PHI0, NotPositive

EXACT_TOL = 1e-12
RATIO_H4 = 12.0
RATIO_H2 = 3.5


def stencil_eig(k: float, h: float) -> float:
    # the 4th-order stencil maps sin(kx) to lam*cos(kx) exactly
    return (8.0 * np.sin(k * h) - np.sin(2.0 * k * h)) / (6.0 * h)


def ratio_check(coarse: dict, fine: dict, keys, min_ratio: float, floor: float = 1e-13):
    for key in keys:
        if coarse[key] <= floor and fine[key] <= floor:
            continue
        assert fine[key] < coarse[key], key
        assert coarse[key] / fine[key] >= min_ratio, (
            f"{key}: ratio {coarse[key] / fine[key]:.2f} < {min_ratio}"
        )


class TestGridSpec:
    def test_defaults_and_geometry(self):
        g = GridSpec((0, 2), (16, 8))
        assert g.shape == (16, 8)
        assert g.naxes == 2
        assert g.npoints == 128
        assert_allclose(g.spacings, [2 * np.pi / 16, 2 * np.pi / 8])
        assert_allclose(g.cell_volume, np.prod(g.spacings))
        assert g.axis_for(0) == 0
        assert g.axis_for(2) == 1
        assert g.axis_for(1) is None

    def test_refine(self):
        g = GridSpec((0,), (16,))
        g2 = g.refine(2)
        assert g2.sizes == (32,)
        assert g2.periods == g.periods

    def test_dict_round_trip(self):
        g = GridSpec((0, 1, 3), (8, 12, 16), (1.0, 2.0, 3.0))
        assert GridSpec.from_dict(g.to_dict()) == g

    @pytest.mark.parametrize(
        "dims,sizes",
        [
            ((), ()),
            ((0, 1, 2, 3), (8, 8, 8, 8)),
            ((1, 0), (8, 8)),
            ((0, 0), (8, 8)),
            ((7,), (8,)),
            ((0,), (7,)),
            ((0,), (8, 8)),
        ],
    )
    def test_rejects_bad_specs(self, dims, sizes):
        with pytest.raises(ValueError):
            GridSpec(dims, sizes)

    def test_rejects_bad_period(self):
        with pytest.raises(ValueError):
            GridSpec((0,), (8,), (0.0,))


class TestPartial:
    def test_stencil_eigenfunction_exact(self):
        # D4 sin(kx) = lam_k cos(kx) holds to roundoff for every mode
        g = GridSpec((0,), (16,))
        x = g.coords()[0]
        h = g.spacings[0]
        for k in (1, 2, 3):
            d = partial_on_grid(g, np.sin(k * x), 0)
            lam = stencil_eig(k, h)
            assert np.abs(d - lam * np.cos(k * x)).max() <= 1e-10 * abs(lam)

    def test_fourth_order_analytic_error(self):
        # error against the true derivative obeys the (kh)^4/30 bound
        for n in (16, 32):
            g = GridSpec((0,), (n,))
            x = g.coords()[0]
            h = g.spacings[0]
            k = 2
            d = partial_on_grid(g, np.sin(k * x), 0)
            err = np.abs(d - k * np.cos(k * x)).max()
            assert err <= 1.05 * k * (k * h) ** 4 / 30.0

    def test_inactive_dim_is_zero(self):
        g = GridSpec((0,), (16,))
        f = np.sin(g.coords()[0])
        assert np.array_equal(partial_on_grid(g, f, 3), np.zeros_like(f))

    def test_band_limited_matches_spectral_oracle(self):
        # modes evaluated directly; amplitude keeps the h^4 error below 1e-6
        g = GridSpec((0, 1), (32, 32))
        cx, cy = g.coords()
        rng = np.random.default_rng(17)
        modes = [
            (rng.integers(-1, 2, size=2), 0.002 * rng.standard_normal(), rng.uniform(0, 2 * np.pi))
            for _ in range(5)
        ]
        f = np.zeros(g.shape)
        df0 = np.zeros(g.shape)
        for kvec, a, th in modes:
            phase = kvec[0] * cx + kvec[1] * cy + th
            f += a * np.cos(phase)
            df0 += -a * kvec[0] * np.sin(phase)
        assert np.abs(partial_on_grid(g, f, 0) - df0).max() <= 1e-6

    def test_partial_tensor_stacks_leading_index(self, gauge16):
        dg = partial_tensor(gauge16, gauge16.g)
        assert dg.shape == gauge16.grid.shape + (7, 7, 7)
        assert_allclose(dg[..., 0, :, :], partial_on_grid(gauge16.grid, gauge16.g, 0))
        assert np.array_equal(dg[..., 3, :, :], np.zeros_like(gauge16.g))


class TestStructureField:
    def test_identity_suite_every_point(self, gauge16):
        report = gauge16.identity_report(threshold=1e-9)
        assert report.passed, report.failing()

    def test_metric_positive(self, gauge16):
        assert gauge16.min_eig_g() > 0.0

    def test_shape_validation(self):
        g = GridSpec((0,), (8,))
        with pytest.raises(ValueError, match="shape"):
            StructureField(g, PHI0)

    def test_rejects_non_alternating(self):
        g = GridSpec((0,), (8,))
        phi = np.broadcast_to(PHI0, (8, 7, 7, 7)).copy()
        phi[..., 0, 0, 1] = 0.3
        with pytest.raises(ValueError, match="alternating"):
            StructureField(g, phi)

    def test_degenerate_form_not_positive(self):
        g = GridSpec((0,), (8,))
        phi = np.zeros((8, 7, 7, 7))
        phi[..., 0, 1, 2] = 1.0
        phi[..., 1, 2, 0] = 1.0
        phi[..., 2, 0, 1] = 1.0
        phi[..., 1, 0, 2] = -1.0
        phi[..., 0, 2, 1] = -1.0
        phi[..., 2, 1, 0] = -1.0
        with pytest.raises(NotPositive):
            StructureField(g, phi)

    def test_cache_write_once(self, gauge16):
        a = gauge16.cached("probe", lambda: np.arange(3.0))
        b = gauge16.cached("probe", lambda: np.zeros(3))
        assert a is b
        assert not a.flags.writeable

    def test_phi_read_only(self, gauge16):
        with pytest.raises(ValueError):
            gauge16.phi[(0,) * gauge16.phi.ndim] = 1.0

    def test_generate_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_field("spherical", {}, GridSpec((0,), (8,)), seed=0)

    def test_generator_is_deterministic(self):
        g = GridSpec((0,), (8,))
        a = generate_field("gauge_deform", {"amplitude": 0.05}, g, seed=9)
        b = generate_field("gauge_deform", {"amplitude": 0.05}, g, seed=9)
        assert np.array_equal(a.phi, b.phi)

    def test_refinement_samples_same_function(self):
        # the seeded generator must define one smooth field across resolutions
        coarse = generate_field("conformal", {"amplitude": 0.05}, GridSpec((0,), (8,)), seed=4)
        fine = generate_field("conformal", {"amplitude": 0.05}, GridSpec((0,), (16,)), seed=4)
        assert_allclose(fine.phi[::2], coarse.phi, atol=1e-13)


class TestChristoffel:
    def test_flat_connection_vanishes(self, flat_field):
        assert np.abs(christoffel(flat_field)).max() <= EXACT_TOL

    def test_metric_compatibility_exact(self, gauge16):
        # Gamma is built from the same stencil as the derivative, so nabla g
        # cancels identically, not just to truncation order
        assert nabla_g_residual(gauge16) <= 1e-14

    def test_nabla_scalar_is_partial(self, gauge16):
        f = gauge16.g[..., 0, 1]
        assert_allclose(nabla(gauge16, f, 0), partial_tensor(gauge16, f))


class TestCurvature:
    def test_flat_curvature_vanishes(self, flat_field):
        cf = curvature(flat_field)
        assert np.abs(cf.riemann.data).max() <= EXACT_TOL
        assert np.abs(cf.ricci).max() <= EXACT_TOL
        assert np.abs(cf.scalar).max() <= EXACT_TOL

    def test_first_bianchi_exact(self, gauge16):
        # algebraic consequence of the torsion-free discrete connection
        assert curvature(gauge16).riemann.bianchi_residual <= 1e-14

    def test_pair_symmetry_converges(self, gauge16, gauge32):
        r16 = curvature(gauge16).pair_residual
        r32 = curvature(gauge32).pair_residual
        ratio_check({"p": r16}, {"p": r32}, ["p"], RATIO_H2)

    def test_ricci_identity(self, gauge16, gauge32):
        res = {}
        for name, sf in (("c", gauge16), ("f", gauge32)):
            w = np.stack(
                [
                    0.1 * fourier_scalar(sf.grid, np.random.default_rng(100 + i), nmodes=2, max_wave=1)
                    for i in range(7)
                ],
                axis=-1,
            )
            res[name] = ricci_identity_residual(sf, w)
        ratio_check({"r": res["c"]}, {"r": res["f"]}, ["r"], RATIO_H2)

    def test_contracted_second_bianchi(self, gauge16, gauge32):
        r16 = second_bianchi_residual(gauge16)
        r32 = second_bianchi_residual(gauge32)
        ratio_check({"b": r16}, {"b": r32}, ["b"], RATIO_H2)


class TestLieDerivativeBasics:
    def test_zero_vector_gives_zero(self, gauge16):
        w = np.zeros(gauge16.grid.shape + (7,))
        assert np.abs(lie_derivative_phi(gauge16, w)).max() == 0.0

    def test_flat_constant_vector_gives_zero(self, flat_field):
        w = np.broadcast_to(np.arange(1.0, 8.0), flat_field.grid.shape + (7,))
        assert np.abs(lie_derivative_phi(flat_field, w)).max() <= EXACT_TOL
