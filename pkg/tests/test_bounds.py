"""Tail function, its inverse, bound arithmetic and the stop decision."""
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from stopdet import (
    Continue,
    InputError,
    Stop,
    BoundsState,
    bound_values,
    bounds_at,
    decide,
    evaluate_stop,
    h_n,
    h_n_inverse,
    make_config,
    relative_error_bound,
)
from stopdet.bounds import log_h_n

# H_N^{-1}(target) by 200-step bisection in 50-digit arithmetic (mpmath).
HN_INVERSE_ORACLE = [
    (10, 0.005, 9.2289553954751837),
    (10, 0.05, 7.3237117356594143),
    (1000, 0.025, 85.841030682523847),
    (1000, 0.05, 77.365878860310754),
    (8192, 0.05, 221.53124912049837),
    (8192, 0.25, 150.70423210925389),
    (100000, 0.005, 1029.3904790697501),
    (100000, 0.25, 526.55255294564171),
]

sizes = st.integers(1, 10**6)


class TestTailFunction:
    @pytest.mark.parametrize("n_total", [1, 7, 1000, 10**6])
    def test_one_at_zero(self, n_total):
        assert h_n(0, n_total) == 1.0

    def test_single_addend(self):
        np.testing.assert_allclose(h_n(1, 1), 0.5, rtol=1e-15)

    def test_zero_beyond_n(self):
        assert h_n(10.5, 10) == 0.0

    def test_value_at_n(self):
        # decreases to 2^-N at x = N
        np.testing.assert_allclose(log_h_n(50.0, 50), -50 * math.log(2), rtol=1e-14)

    def test_large_n_does_not_overflow(self):
        assert 0 < h_n(1e3, 10**9) < 1

    def test_negative_argument(self):
        with pytest.raises(InputError):
            h_n(-1.0, 10)

    @given(n_total=sizes, u=st.floats(0, 1), v=st.floats(0, 1))
    def test_strictly_decreasing(self, n_total, u, v):
        x, y = sorted((u * n_total, v * n_total))
        assume(y - x > 1e-9 * n_total)
        assert log_h_n(x, n_total) > log_h_n(y, n_total)


class TestTailInverse:
    def test_target_one(self):
        assert h_n_inverse(1.0, 25) == 0.0

    def test_single_addend(self):
        assert h_n_inverse(0.5, 1) == 1.0

    def test_round_trip(self):
        assert abs(h_n(h_n_inverse(0.05, 1000), 1000) - 0.05) <= 1e-9

    @pytest.mark.parametrize("n_total, target, expected", HN_INVERSE_ORACLE)
    def test_matches_high_precision_bisection(self, n_total, target, expected):
        x = h_n_inverse(target, n_total)
        assert expected - 1e-9 <= x <= expected + 2e-12 * n_total

    def test_conservative_side(self):
        for n_total, target, _ in HN_INVERSE_ORACLE:
            assert h_n(h_n_inverse(target, n_total), n_total) <= target

    @pytest.mark.parametrize("target", [0.0, -0.1, 1.5, math.nan])
    def test_rejects_bad_target(self, target):
        with pytest.raises(InputError):
            h_n_inverse(target, 10)

    def test_below_reachable_range_clamps_to_n(self):
        assert h_n_inverse(2.0**-12, 10) == 10.0

    @given(n_total=st.integers(1, 10**5), frac=st.floats(0, 1))
    def test_round_trip_property(self, n_total, frac):
        # targets in [2^-N, 1]
        target = math.exp(frac * n_total * math.log(0.5))
        assume(target > 0)
        assert abs(h_n(h_n_inverse(target, n_total), n_total) - target) <= 1e-9


class TestStoppingConfig:
    def test_rejects_delta_two(self):
        with pytest.raises(InputError):
            make_config(10, 1e-3, 2.0, 0.1, 0.0)

    def test_single_addend_slack(self):
        cfg = make_config(1, 1.0, 1.0, 0.1, 3.0)
        assert cfg.kappa_minus == 0.0
        assert cfg.c_delta == 3.0

    def test_desk_protocol_slack_finite(self):
        cfg = make_config(8192, 1e-3, 0.1, 0.1, math.log(1.001))
        assert math.isfinite(cfg.c_delta) and cfg.c_delta > 0
        np.testing.assert_allclose(cfg.c_delta, (math.log(1.001) - math.log(1e-3)) * 221.53124912049837, rtol=1e-10)

    @pytest.mark.parametrize("kwargs", [
        dict(n_total=0), dict(n_total=2.5), dict(sigma2=0.0), dict(delta=0.0), dict(r=-0.1), dict(r=math.nan),
        dict(kappa_plus=math.log(1e-3)),
    ])
    def test_rejects_invalid(self, kwargs):
        args = dict(n_total=10, sigma2=1e-3, delta=0.1, r=0.1, kappa_plus=0.0) | kwargs
        with pytest.raises(InputError):
            make_config(**args)

    def test_loose_precision_flag(self):
        assert make_config(10, 1e-3, 0.1, 1.0, 0.0).loose_precision
        assert not make_config(10, 1e-3, 0.1, 0.5, 0.0).loose_precision

    @given(d1=st.floats(1e-6, 1.0), d2=st.floats(1e-6, 1.0), n_total=st.integers(1, 10**5))
    def test_slack_monotone_in_delta(self, d1, d2, n_total):
        lo, hi = sorted((d1, d2))
        c_lo = make_config(n_total, 1e-3, lo, 0.1, 0.0).c_delta
        c_hi = make_config(n_total, 1e-3, hi, 0.1, 0.0).c_delta
        assert c_hi <= c_lo


class TestBoundValues:
    def test_lower(self):
        state = bound_values(5, -10.0, 10, math.log(1e-3), 0.001, 2.0)
        np.testing.assert_allclose(state.lower, -44.538776394910684, rtol=1e-14)

    def test_upper(self):
        state = bound_values(5, -10.0, 10, math.log(1e-3), 0.001, 2.0)
        np.testing.assert_allclose(state.upper_prob, -16.0, rtol=1e-15)
        np.testing.assert_allclose(state.upper_det, -9.995, rtol=1e-15)
        assert state.upper == state.upper_prob

    def test_all_addends_seen(self):
        cfg = make_config(10, 1e-3, 0.1, 0.1, 0.001)
        state = bounds_at(10, -7.5, cfg)
        assert state.lower == state.upper_det == -7.5
        assert state.upper == -7.5

    @pytest.mark.parametrize("n", [0, 11])
    def test_rejects_out_of_range(self, n):
        with pytest.raises(InputError):
            bounds_at(n, 0.0, make_config(10, 1e-3, 0.1, 0.1, 0.0))

    @given(n_total=st.integers(2, 5000), frac=st.floats(0, 1), mean=st.floats(0, 1), delta=st.floats(1e-4, 1))
    def test_deterministic_upper_above_lower(self, n_total, frac, mean, delta):
        cfg = make_config(n_total, 1e-3, delta, 0.1, math.log(1.001))
        n = max(1, int(frac * n_total))
        d_n = n * (cfg.kappa_minus + mean * (cfg.kappa_plus - cfg.kappa_minus))
        state = bounds_at(n, d_n, cfg)
        assert state.lower <= state.upper_det
        assert state.lower <= state.estimate <= state.upper or state.lower > state.upper


class TestRelativeErrorBound:
    def test_degenerate(self):
        assert relative_error_bound(-42.0, -42.0) == 0.0

    def test_negative_interval(self):
        np.testing.assert_allclose(relative_error_bound(-44.0, -40.0), 0.05, rtol=1e-15)

    def test_positive_interval(self):
        np.testing.assert_allclose(relative_error_bound(40.0, 44.0), 0.05, rtol=1e-15)

    @pytest.mark.parametrize("lower, upper", [(-1.0, 1.0), (0.0, 3.0), (-3.0, 0.0)])
    def test_undefined_across_zero(self, lower, upper):
        assert relative_error_bound(lower, upper) is None

    def test_inverted(self):
        with pytest.raises(InputError):
            relative_error_bound(1.0, -1.0)

    @given(a=st.floats(1e-6, 1e6), b=st.floats(1e-6, 1e6), s=st.floats(0, 1), t=st.floats(0, 1),
           sign=st.sampled_from([-1.0, 1.0]))
    def test_bounds_error_of_any_point_estimate(self, a, b, s, t, sign):
        lower, upper = sorted((sign * a, sign * b))
        truth = lower + s * (upper - lower)
        guess = lower + t * (upper - lower)
        bound = max(upper - guess, guess - lower) / min(abs(lower), abs(upper))
        assert abs(truth - guess) / abs(truth) <= bound * (1 + 1e-12)
        mid = 0.5 * (lower + upper)
        assert abs(truth - mid) / abs(truth) <= relative_error_bound(lower, upper) * (1 + 1e-12)


def _state(lower, upper):
    return BoundsState(1, 0.0, lower, upper, upper, upper)


class TestDecide:
    def test_stop(self):
        decision = decide(_state(-44.0, -40.0), 0.1)
        assert isinstance(decision, Stop)
        assert decision.estimate == -42.0

    def test_continue(self):
        assert isinstance(decide(_state(-44.0, -40.0), 0.01), Continue)

    @pytest.mark.parametrize("r", [0.1, 10.0, 1e6])
    def test_sign_mixed_never_stops(self, r):
        assert isinstance(decide(_state(-1.0, 1.0), r), Continue)

    def test_zero_bound_fails_sign_test(self):
        assert isinstance(decide(_state(0.0, 0.0), 1.0), Continue)

    def test_boundary_is_inclusive(self):
        assert isinstance(decide(_state(-44.0, -40.0), 0.05), Stop)

    def test_inverted_interval_continues(self):
        assert isinstance(decide(_state(-40.0, -44.0), 1.0), Continue)

    @given(a=st.floats(1e-3, 1e3), b=st.floats(1e-3, 1e3), r1=st.floats(0, 2), r2=st.floats(0, 2))
    def test_monotone_in_r(self, a, b, r1, r2):
        state = _state(*sorted((-a, -b)))
        lo, hi = sorted((r1, r2))
        if isinstance(decide(state, lo), Stop):
            assert isinstance(decide(state, hi), Stop)

    def test_evaluate_stop_requires_interior_index(self):
        cfg = make_config(10, 1e-3, 0.1, 0.1, 0.0)
        with pytest.raises(InputError):
            evaluate_stop(10, -5.0, cfg)

    def test_evaluate_stop_uses_config(self):
        cfg = make_config(10, 1e-3, 0.1, 1e6, 0.0)
        decision = evaluate_stop(9, -60.0, cfg)
        assert decision.bounds == bounds_at(9, -60.0, cfg)
