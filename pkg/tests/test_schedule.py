import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alfcg.exceptions import InvalidParameterError
from alfcg.numerics import make_rng
from alfcg.schedule import AdaptiveState, step_size


@pytest.mark.parametrize("variant", ["FS", "MVR1", "MVR2", "D"])
def test_initial_values(variant):
    assert AdaptiveState(variant, rho=0.3).next_L_and_alpha() == (0.3, 1.0)


def test_record_step_examples():
    s = AdaptiveState("FS", rho=1.0, beta=5.0)
    s.next_L_and_alpha()
    s.record_step(0.0)
    assert (s.A, s.S, s.M) == (0.0, 5.0, 5.0)
    s = AdaptiveState("FS", rho=1.0)
    s.next_L_and_alpha()
    s.record_step(2.0)
    assert s.A == 4.0
    with pytest.raises(InvalidParameterError):
        s.record_step(-1.0)


def test_accumulator_matches_shadow_sum():
    rng = make_rng(0)
    s = AdaptiveState("MVR2", rho=0.7, beta=3.0)
    shadow_A = shadow_S = shadow_M = 0.0
    for _ in range(500):
        L, _ = s.next_L_and_alpha()
        step = rng.exponential()
        s.record_step(step)
        shadow_A += (L * step) ** 2
        shadow_S += 3.0 + (L * step) ** 2
        shadow_M = max(shadow_M, 3.0 + (L * step) ** 2)
    assert s.A == pytest.approx(shadow_A, rel=1e-12)
    assert s.S == pytest.approx(shadow_S, rel=1e-12)
    assert s.M == shadow_M


def test_mvr1_alpha_after_one_null_step():
    s = AdaptiveState("MVR1", rho=1e-5, beta=100.0)
    s.next_L_and_alpha()
    s.record_step(0.0)
    L, alpha = s.next_L_and_alpha()
    assert alpha == pytest.approx(0.0995037190209989136, rel=1e-14)  # 101**-0.5 via mpmath
    assert L == pytest.approx(1e-5 * alpha ** -0.5, rel=1e-14)


def test_mvr2_alpha_after_two_null_steps():
    s = AdaptiveState("MVR2", rho=1e-5, beta=100.0)
    s.next_L_and_alpha()
    s.record_step(0.0)
    _, a1 = s.next_L_and_alpha()
    assert a1 == 1.0
    s.record_step(0.0)
    L2, a2 = s.next_L_and_alpha()
    assert a2 == pytest.approx(0.632048217555375358, rel=1e-14)  # (101/201)**(2/3) via mpmath
    assert L2 == pytest.approx(1e-5 * a2 ** -0.25, rel=1e-14)


def test_fs_recursive_identity():
    rng = make_rng(1)
    rho = 0.05
    s = AdaptiveState("FS", rho=rho)
    L, _ = s.next_L_and_alpha()
    for _ in range(2000):
        step = rng.uniform(0, 3)
        s.record_step(step)
        L_next, _ = s.next_L_and_alpha()
        assert L_next ** 2 == pytest.approx(L ** 2 * (1 + rho ** 2 * step ** 2), rel=1e-12)
        assert L_next / L <= 1 + rho * step + 1e-12
        assert L_next >= L
        L = L_next


def test_mvr1_alpha_nonincreasing():
    rng = make_rng(2)
    s = AdaptiveState("MVR1", rho=1.0, beta=1.0)
    L, prev = s.next_L_and_alpha()
    for _ in range(2000):
        s.record_step(rng.exponential(0.1) / L)
        L, alpha = s.next_L_and_alpha()
        assert 0 < alpha <= prev <= 1
        prev = alpha


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=60), st.floats(0.0, 200.0))
def test_mvr2_inverse_alpha_increments(deltas_sq, beta):
    s = AdaptiveState("MVR2", rho=1.0, beta=beta)
    L, alpha = s.next_L_and_alpha()
    for u in deltas_sq:
        s.record_step(math.sqrt(u) / L)
        L, new_alpha = s.next_L_and_alpha()
        inc = 1.0 / new_alpha - 1.0 / alpha
        assert -1e-12 <= inc <= 2.0 / 3.0 + 1e-12
        alpha = new_alpha


def test_step_size_examples():
    g, x, v = np.array([1.0, 0.0]), np.zeros(2), np.array([-1.0, 0.0])
    assert step_size(0.0, 0.0, g, v, x, 1.0) == 1.0
    assert step_size(0.0, 0.0, g, v, x, 4.0) == 0.25
    assert step_size(0.0, 0.0, g, x, x, 4.0) == 0.0
    with pytest.raises(InvalidParameterError):
        step_size(0.0, 0.0, g, v, x, 0.0)


def test_step_size_clamps_negative_numerator():
    g, x, v = np.array([1.0, 0.0]), np.zeros(2), np.array([1.0, 0.0])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert step_size(0.0, 0.0, g, v, x, 1.0) == 0.0
    assert caught


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-8, 1e8))
def test_step_size_in_unit_interval(seed, L):
    rng = make_rng(seed)
    g, v, x = rng.standard_normal((3, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert 0.0 <= step_size(0.0, 0.0, g, v, x, L) <= 1.0
