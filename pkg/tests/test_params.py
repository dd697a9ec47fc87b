import math

import pytest
from hypothesis import given, strategies as st

from balis.errors import ConfigError
from balis.params import (
    Params,
    compute_thresholds,
    is_gamma_balanced,
    log_base_b,
    snap_floor,
)


class TestBalancedness:
    def test_examples(self):
        assert is_gamma_balanced(2, 2, 0.5)
        assert not is_gamma_balanced(3, 0, 0.5)
        assert is_gamma_balanced(1, 2, 1 / 3)

    def test_strictness_at_exactly_one(self):
        # |2 - 0.5*2| = 1 is not < 1
        assert not is_gamma_balanced(2, 0, 0.5)

    @given(
        st.integers(min_value=0, max_value=200),
        st.integers(min_value=0, max_value=200),
        st.sampled_from([0.5, 1 / 3, 0.25, 0.4, 7 / 16, 0.05]),
    )
    def test_side_swap_symmetry(self, l, r, gamma):
        if l == r == 0:
            return
        assert is_gamma_balanced(l, r, gamma) == is_gamma_balanced(r, l, 1 - gamma)

    @given(
        st.integers(min_value=0, max_value=64),
        st.integers(min_value=0, max_value=64),
        st.sampled_from([0.5, 0.25, 1 / 3, 0.125]),
    )
    def test_rational_path_matches_float_path(self, l, r, gamma):
        total = l + r
        float_result = abs(l - gamma * total) < 1.0 or abs(r - gamma * total) < 1.0
        assert is_gamma_balanced(l, r, gamma) == float_result

    def test_rejects_out_of_range_gamma(self):
        with pytest.raises(ConfigError):
            is_gamma_balanced(1, 1, 0.0)
        with pytest.raises(ConfigError):
            is_gamma_balanced(1, 1, 1.0)


class TestParams:
    def test_mu_defaults_to_half_epsilon_squared(self):
        p = Params(16, 0.5, 0.5, 0.2)
        assert p.mu == pytest.approx(0.02)
        assert Params(16, 0.5, 0.5, 0.2, mu=0.3).mu == 0.3

    def test_gamma_above_half_is_rejected_with_guidance(self):
        with pytest.raises(ConfigError, match="swap"):
            Params(16, 0.5, 0.7, 0.2)

    def test_b_defined_for_p_below_one(self):
        assert Params(16, 0.5, 0.5, 0.2).b == 2.0
        assert Params(16, 0.75, 0.5, 0.2).b == pytest.approx(4.0)
        with pytest.raises(ConfigError):
            _ = Params(16, 1.0, 0.5, 0.2).b

    def test_degenerate_p_allowed_for_generation_params(self):
        assert Params(4, 0.0, 0.5, 0.2).p == 0.0
        assert Params(4, 1.0, 0.5, 0.2).p == 1.0


class TestThresholds:
    def test_balanced_case(self):
        th = compute_thresholds(Params(1024, 0.5, 0.5, 0.2))
        assert th.alpha_stat == 40.0
        assert th.alpha_comp == 20.0
        assert (th.t1, th.t2) == (8, 8)

    def test_one_third_case(self):
        th = compute_thresholds(Params(1024, 0.5, 1 / 3, 0.1))
        assert th.alpha_stat == pytest.approx(45.0, rel=1e-12)
        assert th.alpha_comp == pytest.approx(30.0, rel=1e-12)
        assert (th.t1, th.t2) == (9, 18)

    def test_tau_target_with_explicit_mu(self):
        th = compute_thresholds(Params(1024, 0.5, 0.5, 0.2, mu=0.02))
        assert th.tau_target == 9

    def test_rejects_degenerate_p(self):
        with pytest.raises(ConfigError):
            compute_thresholds(Params(16, 0.0, 0.5, 0.2))
        with pytest.raises(ConfigError):
            compute_thresholds(Params(16, 1.0, 0.5, 0.2))

    @given(
        st.sampled_from([64, 100, 1024, 4096, 65536]),
        st.sampled_from([0.3, 0.5, 0.7]),
        st.sampled_from([0.5, 1 / 3, 0.25, 0.4]),
        st.sampled_from([0.1, 0.2, 0.3, 0.5]),
    )
    def test_targets_are_always_balanced(self, n, p, gamma, epsilon):
        th = compute_thresholds(Params(n, p, gamma, epsilon))
        assert th.t1 >= 1 and th.t2 >= 1
        assert is_gamma_balanced(th.t1, th.t2, gamma)
        assert th.alpha_comp == pytest.approx((1 - gamma) * th.alpha_stat, rel=1e-12)


def test_snap_floor_absorbs_float_noise():
    assert snap_floor(8.0) == 8
    assert snap_floor(7.9999999999995) == 8
    assert snap_floor(7.9) == 7
    assert snap_floor(11.2) == 11


def test_log_base_b_exact_for_powers_of_two():
    assert log_base_b(1024, 0.5) == 10.0
    assert log_base_b(65536, 0.5) == 16.0
    assert log_base_b(1000, 0.5) == pytest.approx(math.log2(1000))
