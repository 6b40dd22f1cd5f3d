"""Lorentz norms of piecewise-constant traces: closed forms and identities."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusns import (TimeTrace, decreasing_rearrangement, lorentz_norm,
                     mixed_time_norm)
from torusns.lorentz import lorentz_norm_rearranged, lp_time_norm, trace_of_run


def make_trace(values, lengths, t0=0.0):
    values = np.asarray(values, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    times = t0 + np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    return TimeTrace(times, values, end=t0 + float(np.sum(lengths)))


@st.composite
def traces(draw, max_steps=8):
    m = draw(st.integers(min_value=2, max_value=max_steps))
    values = draw(st.lists(
        st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
        min_size=m, max_size=m))
    lengths = draw(st.lists(
        st.floats(min_value=1e-3, max_value=5.0, allow_nan=False),
        min_size=m, max_size=m))
    return make_trace(values, lengths)


class TestTraceValidation:
    def test_requires_two_samples(self):
        with pytest.raises(ValueError):
            TimeTrace([0.0], [1.0])

    def test_requires_increasing_times(self):
        with pytest.raises(ValueError):
            TimeTrace([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])

    def test_requires_nonnegative_values(self):
        with pytest.raises(ValueError):
            TimeTrace([0.0, 1.0], [1.0, -0.5])

    def test_end_before_last_sample(self):
        with pytest.raises(ValueError):
            TimeTrace([0.0, 1.0], [1.0, 1.0], end=0.5)


class TestRearrangement:
    def test_already_arranged(self):
        g = make_trace([3.0, 0.0], [0.4, 0.6])
        f = decreasing_rearrangement(g)
        assert np.allclose(f.times, [0.0, 0.4])
        assert np.allclose(f.values, [3.0, 0.0])

    def test_two_steps_by_hand(self):
        # 1 on measure 0.3, 2 on measure 0.2 -> 2 on [0, 0.2), 1 on [0.2, 0.5)
        g = make_trace([1.0, 2.0], [0.3, 0.2])
        f = decreasing_rearrangement(g)
        assert np.allclose(f.times, [0.0, 0.2])
        assert np.allclose(f.values, [2.0, 1.0])
        assert abs(f.end - 0.5) < 1e-15

    def test_constant_trace_fixed_point(self):
        g = make_trace([2.0, 2.0, 2.0], [0.1, 0.2, 0.3])
        f = decreasing_rearrangement(g)
        assert np.all(f.values == 2.0)
        assert abs(f.total_measure - g.total_measure) < 1e-15

    @given(traces())
    @settings(max_examples=60, deadline=None)
    def test_level_sets_preserved(self, g):
        f = decreasing_rearrangement(g)
        for s in np.unique(g.values):
            m_g = float(np.sum(g.step_lengths[g.values > s]))
            m_f = float(np.sum(f.step_lengths[f.values > s]))
            assert abs(m_g - m_f) <= 1e-12 * max(1.0, m_g)


class TestLorentzNorm:
    def test_indicator_sup_norm(self):
        # g = c 1_[0,a]: sup_s s |{g > s}|^{1/p} = c a^{1/p}
        for c, a, p in ((2.0, 0.3, 1.5), (5.0, 2.0, 4.0), (1.0, 1.0, 1.0)):
            g = make_trace([c, 0.0], [a, 1.0])
            assert abs(lorentz_norm(g, p, np.inf) - c * a ** (1 / p)) <= 1e-12

    def test_indicator_r_equals_p_is_lp(self):
        for c, a, p in ((2.0, 0.3, 1.5), (5.0, 2.0, 4.0)):
            g = make_trace([c, 0.0], [a, 1.0])
            assert abs(lorentz_norm(g, p, p) - c * a ** (1 / p)) <= 1e-12

    @given(traces(), st.sampled_from([1.0, 1.5, 2.0, 4.0 / 3.0, 4.0]))
    @settings(max_examples=80, deadline=None)
    def test_layer_cake_identity(self, g, p):
        lhs = lorentz_norm(g, p, p)
        rhs = lp_time_norm(g, p)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)

    @given(traces(), st.sampled_from([(1.5, 1.0), (2.0, 3.0), (4.0, np.inf)]))
    @settings(max_examples=60, deadline=None)
    def test_equimeasurability(self, g, pr):
        p, r = pr
        f = decreasing_rearrangement(g)
        assert abs(lorentz_norm(g, p, r) - lorentz_norm(f, p, r)) \
            <= 1e-12 * max(1.0, lorentz_norm(g, p, r))

    @given(traces(), st.sampled_from([(1.5, 1.0), (2.0, 2.0), (3.0, np.inf)]))
    @settings(max_examples=60, deadline=None)
    def test_rearranged_form_agrees(self, g, pr):
        p, r = pr
        a = lorentz_norm(g, p, r)
        b = lorentz_norm_rearranged(g, p, r)
        assert abs(a - b) <= 1e-10 * max(1.0, a)

    @given(traces(), st.sampled_from([(1.5, 2.0, 2.0), (2.0, 1.0, 2.0),
                                      (3.0, np.inf, 0.5), (1.0, 4.0, 3.0)]))
    @settings(max_examples=60, deadline=None)
    def test_power_rule(self, g, pra):
        # ||g^alpha||_{p,r} = ||g||^alpha_{p alpha, r alpha}; exponent
        # combinations chosen so both sides stay in the p, r >= 1 contract
        p, r, alpha = pra
        powered = TimeTrace(g.times, g.values ** alpha, end=g.end)
        lhs = lorentz_norm(powered, p, r)
        ra = np.inf if r == np.inf else r * alpha
        rhs = lorentz_norm(g, p * alpha, ra) ** alpha
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)

    def test_power_law_weak_norm_approaches_one(self):
        # sampled x^{-k} on a fine dyadic grid: L_{1/k, inf} norm -> 1
        # (k <= 1 keeps the Lebesgue index 1/k inside the p >= 1 contract)
        for k in (0.5, 0.75, 1.0):
            m = 2 ** 16
            times = 2.0 ** (np.arange(m) / 1024.0)  # dyadic refinement
            values = times ** (-k)
            g = TimeTrace(times, values, end=times[-1] * 2 ** (1 / 1024.0))
            val = lorentz_norm(g, 1.0 / k, np.inf)
            assert abs(val - 1.0) <= 0.01

    def test_p_inf_requires_r_inf(self):
        g = make_trace([1.0, 2.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            lorentz_norm(g, np.inf, 2.0)
        assert lorentz_norm(g, np.inf, np.inf) == 2.0

    def test_zero_trace(self):
        g = make_trace([0.0, 0.0], [1.0, 1.0])
        for pr in ((2.0, 1.0), (1.5, np.inf)):
            assert lorentz_norm(g, *pr) == 0.0

    def test_monotone_in_horizon_at_r_eq_q(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            vals = rng.uniform(0, 3, size=6)
            g = make_trace(vals, rng.uniform(0.05, 1.0, size=6))
            t_cut = g.times[3] + 0.01
            a = lorentz_norm(g.restrict(t_cut), 2.0, 2.0)
            b = lorentz_norm(g, 2.0, 2.0)
            assert a <= b + 1e-12

    def test_r_embedding_ratio_bounded(self):
        # L_{p,r1} -> L_{p,r2} for r1 <= r2: fitted-constant suite
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(200):
            m = rng.integers(2, 9)
            g = make_trace(rng.uniform(0, 4, size=m), rng.uniform(0.05, 2.0, size=m))
            n1 = lorentz_norm(g, 2.0, 1.0)
            n2 = lorentz_norm(g, 2.0, 4.0)
            if n1 > 0:
                worst = max(worst, n2 / n1)
        assert np.isfinite(worst) and worst <= 3.0

    def test_lorentz_holder_ratio_bounded(self):
        # ||fg||_{p,r} <= C ||f||_{p1,r1} ||g||_{p2,r2} with the index sums
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(200):
            m = rng.integers(2, 9)
            lengths = rng.uniform(0.05, 2.0, size=m)
            f = make_trace(rng.uniform(0, 4, size=m), lengths)
            gv = rng.uniform(0, 4, size=m)
            fg = TimeTrace(f.times, f.values * gv, end=f.end)
            g = TimeTrace(f.times, gv, end=f.end)
            num = lorentz_norm(fg, 1.0, 1.0)
            den = lorentz_norm(f, 2.0, 2.0) * lorentz_norm(g, 2.0, 2.0)
            if den > 0:
                worst = max(worst, num / den)
        assert np.isfinite(worst) and worst <= 2.0


class _ModeField:
    """Stand-in field: scalar amplitude with |.|-independent L_p norms."""

    def __init__(self, amp):
        self.amp = amp

    def norm_lp(self, p):
        return abs(self.amp)


class TestMixedTimeNorm:
    def test_exponential_closed_form(self):
        # field(t) = e^{-t} x (single mode): L_{q,q}(0,T;L_p) matches
        # (int_0^T e^{-qt} dt)^{1/q} up to the step-function error
        q = 2.0
        T = 4.0
        m = 4000
        times = np.linspace(0.0, T, m, endpoint=False)
        mids = times + 0.5 * (T / m)
        run = [(t, _ModeField(np.exp(-tm))) for t, tm in zip(times, mids)]
        val = mixed_time_norm(run, p=2.0, q=q, r=q, end=T)
        exact = ((1 - np.exp(-q * T)) / q) ** (1 / q)
        assert abs(val - exact) <= 1e-5

    def test_zero_run(self):
        run = [(0.0, _ModeField(0.0)), (1.0, _ModeField(0.0))]
        assert mixed_time_norm(run, 2.0, 2.0, 1.0, end=2.0) == 0.0

    def test_trace_of_run_end(self):
        run = [(0.0, _ModeField(1.0)), (1.0, _ModeField(2.0))]
        tr = trace_of_run(run, lambda f: f.norm_lp(2), end=3.0)
        assert abs(tr.total_measure - 3.0) < 1e-15
