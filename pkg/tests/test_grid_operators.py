"""Spectral core: transforms, differential operators, projectors, heat flow."""

import numpy as np
import pytest

from torusns import (PeriodicGrid, ScalarField, VectorField, divergence,
                     gradient, heat_semigroup_step, helmholtz_decompose,
                     laplacian, leray_project)
from torusns.grid import hermitian_defect, to_physical, to_spectral
from torusns.operators import l2_inner


def grid2(n=64):
    return PeriodicGrid.of(2, n)


def random_scalar(grid, rng, decay=2.0):
    white = rng.standard_normal(grid.shape)
    spec = to_spectral(grid, white)
    shape = np.where(grid.k_abs > 0, np.maximum(grid.k_abs, 1.0) ** -decay, 0.0)
    return ScalarField.from_spectral(grid, spec * shape * grid.dealias_mask,
                                     check=False)


def random_vector(grid, rng, decay=2.0):
    return VectorField([random_scalar(grid, rng, decay) for _ in range(grid.dim)])


class TestGridValidation:
    def test_power_of_two_accepted(self):
        PeriodicGrid.of(2, 64)
        PeriodicGrid.of(3, 32)

    def test_three_smooth_accepted(self):
        PeriodicGrid.of(3, 48)

    def test_bad_sizes_rejected(self):
        for n in (7, 10, 20, 4):
            with pytest.raises(ValueError):
                PeriodicGrid(2, n)

    def test_bad_dim_rejected(self):
        with pytest.raises(ValueError):
            PeriodicGrid(4, 16)

    def test_frequencies_range(self):
        g = grid2(16)
        assert g.k_axis.min() == -8 and g.k_axis.max() == 7


class TestTransforms:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        g = grid2()
        vals = rng.standard_normal(g.shape)
        back = to_physical(g, to_spectral(g, vals))
        assert np.max(np.abs(back - vals)) <= 1e-12 * np.max(np.abs(vals))

    def test_hermitian_symmetry_of_real_fields(self):
        rng = np.random.default_rng(1)
        g = grid2(32)
        f = ScalarField.from_physical(g, rng.standard_normal(g.shape))
        assert hermitian_defect(f.spec) <= 1e-12

    def test_from_spectral_rejects_non_hermitian(self):
        g = grid2(16)
        bad = np.zeros(g.shape, dtype=complex)
        bad[1, 0] = 1.0  # no conjugate partner
        with pytest.raises(ValueError):
            ScalarField.from_spectral(g, bad)

    def test_pure_mode_unit_lp_norms(self):
        # normalized measure: |e^{ik.x}| = 1 pointwise, so every L_p norm of
        # the complex mode is 1; for cos(k.x) the L_2 norm is 1/sqrt(2)
        g = grid2()
        x = g.coordinates()
        f = ScalarField.from_physical(g, np.cos(3 * x[0]) + 0 * x[1])
        assert abs(f.norm_l2() - 1 / np.sqrt(2)) < 1e-13
        assert abs(f.norm_lp(np.inf) - 1.0) < 1e-13


class TestDerivatives:
    def test_gradient_single_mode(self):
        g = grid2()
        x = g.coordinates()
        f = ScalarField.from_physical(g, np.sin(x[0]) + 0 * x[1])
        df = gradient(f)
        assert np.max(np.abs(df.components[0].values - np.cos(x[0]))) <= 1e-13
        assert np.max(np.abs(df.components[1].values)) <= 1e-13

    def test_divergence_of_gradient_is_laplacian(self):
        rng = np.random.default_rng(2)
        g = grid2()
        f = random_scalar(g, rng)
        lhs = divergence(gradient(f))
        rhs = laplacian(f)
        assert (lhs - rhs).norm_l2() <= 1e-12 * max(rhs.norm_l2(), 1e-30)

    def test_gradient_of_constant(self):
        g = grid2(16)
        f = ScalarField.from_physical(g, np.full(g.shape, 3.7))
        df = gradient(f)
        assert all(np.max(np.abs(c.values)) == 0.0 for c in df.components)


class TestHelmholtz:
    def test_pure_gradient(self):
        g = grid2()
        x = g.coordinates()
        f = ScalarField.from_physical(g, np.sin(x[0]) + 0 * x[1])
        v = gradient(f)
        pv, qv = helmholtz_decompose(v)
        assert max(np.max(np.abs(c.values)) for c in pv.components) <= 1e-13
        diff = qv - v
        assert max(np.max(np.abs(c.values)) for c in diff.components) <= 1e-13

    def test_stream_function_field(self):
        g = grid2()
        x = g.coordinates()
        psi = np.sin(x[0]) * np.sin(x[1])
        v = VectorField.from_physical(
            g, (-np.sin(x[0]) * np.cos(x[1]), np.cos(x[0]) * np.sin(x[1])))
        pv, qv = helmholtz_decompose(v)
        diff = pv - v
        assert max(np.max(np.abs(c.values)) for c in diff.components) <= 1e-13
        assert max(np.max(np.abs(c.values)) for c in qv.components) <= 1e-13

    def test_idempotence_random(self):
        rng = np.random.default_rng(3)
        g = grid2()
        for _ in range(5):
            v = random_vector(g, rng)
            pv, qv = helmholtz_decompose(v)
            ppv, _ = helmholtz_decompose(pv)
            _, qqv = helmholtz_decompose(qv)
            scale = v.norm_l2()
            assert (ppv - pv).norm_l2() <= 1e-13 * scale
            assert (qqv - qv).norm_l2() <= 1e-13 * scale

    def test_completeness_and_orthogonality(self):
        rng = np.random.default_rng(4)
        g = grid2()
        v = random_vector(g, rng)
        w = random_vector(g, rng)
        pv, qv = helmholtz_decompose(v)
        _, qw = helmholtz_decompose(w)
        assert (pv + qv - v).norm_l2() <= 1e-12 * v.norm_l2()
        assert abs(l2_inner(pv, qw)) <= 1e-12 * v.norm_l2() * w.norm_l2()

    def test_divergence_free_certificate(self):
        rng = np.random.default_rng(5)
        g = PeriodicGrid.of(3, 16)
        v = random_vector(g, rng)
        pv = leray_project(v)
        assert pv.is_divergence_free
        assert pv.divergence_defect() <= 1e-12

    def test_mean_mode_convention(self):
        # constant vector fields are divergence-free; the gradient part of
        # the mean mode is zero by the mean-zero inverse Laplacian convention
        g = grid2(16)
        v = VectorField.from_physical(g, (np.full(g.shape, 1.0),
                                          np.full(g.shape, -2.0)))
        pv, qv = helmholtz_decompose(v)
        assert (pv - v).norm_l2() <= 1e-14
        assert qv.norm_l2() == 0.0


class TestHeatSemigroup:
    def test_single_mode_halves_at_log2(self):
        # closed-form multiplier: e^{-mu |k|^2 dt} = 1/2 at mu=1, |k|^2=1,
        # dt = ln 2
        g = grid2()
        x = g.coordinates()
        f = ScalarField.from_physical(g, np.cos(x[0]) + 0 * x[1])
        out = heat_semigroup_step(f, mu=1.0, dt=np.log(2.0))
        assert np.max(np.abs(out.values - 0.5 * f.values)) <= 1e-15

    def test_tiny_dt_is_identity(self):
        rng = np.random.default_rng(6)
        g = grid2()
        f = random_scalar(g, rng)
        out = heat_semigroup_step(f, mu=1.0, dt=1e-14)
        assert (out - f).norm_l2() <= 1e-12 * f.norm_l2()

    def test_semigroup_property(self):
        rng = np.random.default_rng(7)
        g = grid2()
        f = random_scalar(g, rng)
        a = heat_semigroup_step(heat_semigroup_step(f, 0.7, 0.2), 0.7, 0.3)
        b = heat_semigroup_step(f, 0.7, 0.5)
        assert (a - b).norm_l2() <= 1e-13 * f.norm_l2()

    def test_mean_mode_unchanged(self):
        g = grid2(16)
        f = ScalarField.from_physical(g, np.full(g.shape, 2.5))
        out = heat_semigroup_step(f, mu=3.0, dt=1.0)
        assert abs(out.mean - 2.5) <= 1e-14

    def test_energy_decays(self):
        rng = np.random.default_rng(8)
        g = grid2()
        v = random_vector(g, rng)
        out = heat_semigroup_step(v, mu=1.0, dt=0.1)
        assert out.norm_l2() <= v.norm_l2()

    def test_invalid_parameters(self):
        g = grid2(16)
        f = ScalarField.zero(g)
        with pytest.raises(ValueError):
            heat_semigroup_step(f, mu=-1.0, dt=0.1)
        with pytest.raises(ValueError):
            heat_semigroup_step(f, mu=1.0, dt=0.0)
