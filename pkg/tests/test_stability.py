"""Twin-run stability: the explicit-constant gate, linearity, Osgood mode."""

import math

import numpy as np
import pytest

from torusns.harness.stability import (implied_gronwall_constant, osgood_mode,
                                       stability_experiment,
                                       verify_gronwall_bound)


@pytest.fixture(scope="module")
def twin_2d():
    return stability_experiment(2, 32, 0.1, 1e-4, seed=2, t_end=0.15)


class TestGronwallGate:
    def test_explicit_constant_bound(self, twin_2d):
        assert twin_2d.complete
        assert twin_2d.eq72_max <= 1.05

    def test_x_nondecreasing(self, twin_2d):
        assert np.all(np.diff(twin_2d.X) >= 0)
        assert twin_2d.X[0] == 0.0

    def test_y_nondecreasing(self, twin_2d):
        assert np.all(np.diff(twin_2d.Y) >= -1e-15)

    def test_density_extremes_recorded(self, twin_2d):
        assert twin_2d.r0 == 1.0
        assert twin_2d.R0 == pytest.approx(1.1)
        assert 1.0 < twin_2d.M < 1.1


class TestLinearResponse:
    @pytest.mark.slow
    def test_slope_one(self):
        y = {}
        for amp in (1e-3, 1e-4, 1e-5):
            rep = stability_experiment(2, 32, 0.05, amp, seed=3, t_end=0.15)
            assert rep.complete
            y[amp] = rep.y_end()
        slope = np.polyfit(np.log(list(y.keys())), np.log(list(y.values())), 1)[0]
        assert abs(slope - 1.0) <= 0.1

    def test_zero_perturbation_bitwise_zero(self):
        rep = stability_experiment(2, 32, 0.1, 0.0, seed=3, t_end=0.1)
        assert np.all(rep.X == 0.0)
        assert np.all(rep.Y == 0.0)


class TestFittedBounds:
    def test_constant_stable_across_amplitudes(self):
        cs = []
        for amp in (1e-3, 1e-4):
            rep = stability_experiment(2, 32, 0.1, amp, seed=5, t_end=0.15)
            cs.append(implied_gronwall_constant(rep))
        assert all(math.isfinite(c) for c in cs)
        assert max(cs) / min(cs) <= 1.5

    def test_verify_with_global_constant(self):
        cal = stability_experiment(2, 32, 0.1, 1e-4, seed=6, t_end=0.15)
        c_global = 1.5 * implied_gronwall_constant(cal)
        probe = stability_experiment(2, 32, 0.1, 1e-3, seed=6, t_end=0.15)
        assert verify_gronwall_bound(probe, c_global)

    def test_3d_weights_collected(self):
        rep = stability_experiment(3, 16, 0.1, 1e-4, seed=2, t_end=0.1)
        assert rep.complete
        assert rep.f is not None and np.all(np.isfinite(rep.f))
        assert rep.eq72_max <= 1.05


class TestOsgoodMode:
    def test_zero_perturbation(self):
        rep = stability_experiment(2, 32, 0.1, 0.0, seed=7, t_end=0.1)
        res = osgood_mode(rep, 1.0)
        assert res["below"]

    def test_mean_density_matches_construction(self, twin_2d):
        from torusns.initial_data import density_disk
        from torusns import PeriodicGrid
        rho0 = density_disk(PeriodicGrid.of(2, 32), eps=0.1, seed=2 + 17).values
        assert abs(twin_2d.M - float(np.mean(rho0))) <= 1e-12

    def test_small_perturbation_below_comparison(self):
        cal = stability_experiment(2, 32, 0.1, 1e-4, seed=8, t_end=0.15)
        lo, hi = 1e-6, 1e6
        for _ in range(50):
            mid = math.sqrt(lo * hi)
            if osgood_mode(cal, mid)["below"]:
                hi = mid
            else:
                lo = mid
        c_fit = hi
        probe = stability_experiment(2, 32, 0.1, 1e-3, seed=9, t_end=0.15)
        res = osgood_mode(probe, 1.5 * c_fit)
        assert res["below"]

    def test_requires_2d(self, twin_2d):
        rep3 = stability_experiment(3, 16, 0.1, 1e-4, seed=2, t_end=0.05)
        with pytest.raises(ValueError):
            osgood_mode(rep3, 1.0)
