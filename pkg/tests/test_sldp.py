import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma, ndtr

from ousldp.errors import DomainError, NoExpansionError, OrderError
from ousldp.inversion import b_factor, oracle_tail
from ousldp.model import RegimeCase, Side, rate_function
from ousldp.sldp import (
    edgeworth_coefficient,
    expansion_constants,
    hermite_number,
    max_order,
    tail_probability,
    zero_series_term,
    zero_threshold_exact,
)

from .strategies import theta_c

SQRT_2PI = math.sqrt(2 * math.pi)


def test_constants_right_border():
    k = expansion_constants(1, 2)
    assert k.a_c == pytest.approx(2.0)
    assert k.sigma_c_sq == pytest.approx(2 / 27)
    assert k.k_of_c == pytest.approx(0.5 * math.log(16 / 5))
    assert k.gamma1 == pytest.approx(1 / 75)
    assert k.delta == pytest.approx(5 / 6)
    assert k.delta1 == pytest.approx(1 / (2 * 5 / 6 * math.sqrt(2 * math.pi * math.e)))
    assert k.j_of_c is None and k.beta0 is None


def test_constants_critical():
    k = expansion_constants(1, -1)
    assert k.a_c == pytest.approx(1.0) and k.sigma_c_sq == pytest.approx(0.5)
    assert k.delta1 == pytest.approx(math.exp(-0.25) * gamma(0.25) / (2 * math.pi))
    assert k.gamma1 == pytest.approx(3 / 8)
    # limit of B_T actually attained by the exact tail
    assert k.b_limit == pytest.approx(math.exp(-0.25) * gamma(0.75) / math.pi)


def test_constants_fixed_tilt():
    k = expansion_constants(1, -2)
    assert k.a_c == pytest.approx(-0.75)
    assert k.beta0 == pytest.approx(-1 / (k.a_c * math.sqrt(k.sigma_c_sq) * SQRT_2PI))


def test_constants_valley():
    k = expansion_constants(1, 0.5)
    assert k.a_c == pytest.approx(2 / 3)
    assert k.sigma_c_sq == pytest.approx(0.125)
    assert k.j_of_c == pytest.approx(-0.5 * math.log(0.5 * 1.5 / 1.0))


@given(theta_c(gap=0.02))
def test_constants_finite_and_positive(tc):
    theta, c = tc
    try:
        k = expansion_constants(theta, c)
    except NoExpansionError:
        return
    for name in ("a_c", "sigma_c_sq", "h_of_ac", "k_of_c", "j_of_c", "p_of_c", "gamma1", "delta1", "beta0"):
        v = getattr(k, name)
        if v is not None:
            assert math.isfinite(v)
    if k.sigma_c_sq is not None:
        assert k.sigma_c_sq > 0


def test_no_expansion_regimes():
    with pytest.raises(NoExpansionError):
        expansion_constants(1, 1)
    with pytest.raises(NoExpansionError):
        tail_probability(1, 1, 10)
    with pytest.raises(NoExpansionError):
        expansion_constants(1, 0)


def test_order_errors_name_max_order():
    with pytest.raises(OrderError) as exc:
        tail_probability(1, 2, 10, order=2)
    assert exc.value.max_order == 1
    with pytest.raises(OrderError) as exc:
        tail_probability(-1, -1 / 3, 10, order=1)
    assert exc.value.max_order == 0
    assert max_order(1, 0) is None


@pytest.mark.parametrize("n, h", [(0, 1), (1, 0), (2, -2), (3, 0), (4, 12), (6, -120)])
def test_hermite_examples(n, h):
    assert hermite_number(n) == h


@given(st.integers(0, 30))
def test_hermite_closed_form(n):
    h = hermite_number(n)
    if n % 2:
        assert h == 0
    else:
        assert h == (-1) ** (n // 2) * math.factorial(n) // math.factorial(n // 2)


def test_hermite_rejects_negative():
    with pytest.raises(DomainError):
        hermite_number(-1)


def test_zero_series_coefficient():
    assert zero_series_term(1, 1.0) == pytest.approx(-1 / 3)
    d = 0.3
    for k in range(6):
        herm = hermite_number(2 * k) * d ** (2 * k) / (2**k * math.factorial(2 * k + 1))
        assert herm == pytest.approx(zero_series_term(k, d * d / 2), rel=1e-14)


@pytest.mark.parametrize("T", [5.0, 10.0, 20.0])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_zero_threshold_series_accuracy(T, p):
    r = zero_threshold_exact(1.0, T, p, dps=80)
    assert r.extras["rel_error"] <= 10 * (T * math.exp(-2 * T)) ** (p + 1)
    # the double-precision value carries the same gap up to rounding
    assert abs(r.raw / r.exact - 1) <= r.extras["rel_error"] + 1e-15


def test_zero_threshold_series_monotone_in_order():
    errs = [abs(zero_threshold_exact(1.0, 5.0, p).raw / zero_threshold_exact(1.0, 5.0, p).exact - 1) for p in range(4)]
    assert errs[0] > errs[1] > errs[2] >= errs[3]


def test_zero_threshold_scale_asymptotics():
    ratios = []
    for T in (2.0, 5.0, 10.0):
        d = zero_threshold_exact(1.0, T, 0).extras["d_T"]
        ratios.append(d / math.sqrt(2 * T * math.exp(-2 * T)))
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1) and abs(ratios[-1] - 1) < 1e-8


def test_zero_threshold_complement_identity():
    theta, T = 1.0, 3.0
    r = zero_threshold_exact(theta, T, 0)
    d = r.extras["d_T"]
    upper = 2 * ndtr(-d)  # P(|X_T| > sqrt(T)) = P(theta_hat > 0)
    assert r.exact + upper == pytest.approx(1.0, abs=1e-15)
    assert r.side is Side.LOWER


def test_zero_threshold_printed_scale_is_less_accurate():
    exact = zero_threshold_exact(1.0, 5.0, 3)
    printed = zero_threshold_exact(1.0, 5.0, 3, variant="printed")
    assert abs(printed.raw - printed.exact) > abs(exact.raw - exact.exact)


def test_zero_threshold_rejects_nonpositive_theta():
    with pytest.raises(DomainError):
        zero_threshold_exact(-1.0, 5.0, 1)


def test_stable_zero_example():
    r = tail_probability(-1, 0, 10, 0)
    assert r.raw == pytest.approx(2 * math.exp(-10) / (math.sqrt(2 * math.pi * 10) * math.sqrt(2)), rel=1e-14)
    assert abs(r.raw / oracle_tail(-1, 0, 10).probability - 1) < 0.05


def test_right_border_leading_term():
    r = tail_probability(1, 2, 10, 0)
    k = expansion_constants(1, 2)
    expect = math.exp(-30 + k.k_of_c) / (k.a_c * math.sqrt(k.sigma_c_sq) * math.sqrt(20 * math.pi))
    assert r.raw == pytest.approx(expect, rel=1e-14)
    assert r.side is Side.UPPER and r.rate == 3.0


def test_clamping_records_raw():
    r = tail_probability(-1, -2, 0.05, 0)
    assert r.raw > 1 and r.probability == 1.0


@pytest.mark.parametrize("theta, c", [(1, 2), (-1, -2), (1, -2), (1, 0.5), (-1, 0.5), (0, 1), (0, -1), (1, -1)])
def test_slope_law(theta, c):
    rate = rate_function(theta, c)
    gaps = []
    for T in (10.0, 20.0, 40.0, 80.0):
        r = tail_probability(theta, c, T, 0)
        gaps.append(abs(-r.log_probability / T - rate))
        assert gaps[-1] <= 2.0 * math.log(T) / T
    assert gaps[-1] < gaps[0]


def test_critical_scaling_corrected():
    theta = 1.0
    for T in (10.0, 40.0):
        r = tail_probability(theta, -theta, T, 0)
        scaled = r.raw * math.exp(T * r.rate) / T**0.25
        assert scaled == pytest.approx(gamma(0.75) * theta**0.25 / math.pi, rel=1e-13)


def test_printed_variants_differ_only_where_corrected():
    for theta, c in ((1, 2), (-1, -2), (-1, 0.5)):
        assert tail_probability(theta, c, 10, 0).raw == tail_probability(theta, c, 10, 0, "printed").raw
    valley = tail_probability(1, 0.5, 10, 0)
    assert valley.raw == pytest.approx(10 * tail_probability(1, 0.5, 10, 0, "printed").raw, rel=1e-14)
    sc = tail_probability(-1, -1 / 3, 10, 0)
    assert sc.raw == pytest.approx(0.5 * tail_probability(-1, -1 / 3, 10, 0, "printed").raw, rel=1e-14)


@pytest.mark.parametrize("theta, c", [(1, -2), (-1, -0.5), (0, -1), (-1, -2)])
def test_edgeworth_coefficient_against_oracle(theta, c):
    k = expansion_constants(theta, c)
    b1 = edgeworth_coefficient(theta, c)
    est = [T * (b_factor(theta, c, T) * math.sqrt(T) / k.beta0 - 1) for T in (200.0, 400.0, 800.0)]
    assert abs(est[-1] - b1) < abs(est[0] - b1)
    # the remaining gap is O(1/T); a two-point extrapolation removes most of it
    assert 2 * est[2] - est[1] == pytest.approx(b1, rel=0.01)


@pytest.mark.parametrize("theta, c", [(1, 2), (-1, 1), (0, 1), (1, 0.5), (1, -1), (1, -2), (-1, -2), (0, -1)])
def test_order_one_beats_order_zero_at_moderate_T(theta, c):
    T = 40.0
    exact = oracle_tail(theta, c, T).probability
    e0 = abs(tail_probability(theta, c, T, 0).raw / exact - 1)
    e1 = abs(tail_probability(theta, c, T, 1).raw / exact - 1)
    assert e1 < e0


def test_order_one_error_scaling_right_border():
    errs = []
    Ts = np.array([10.0, 20.0, 40.0, 80.0])
    for T in Ts:
        errs.append(abs(tail_probability(1, 2, T, 1).raw / oracle_tail(1, 2, T).probability - 1))
    slope = np.polyfit(np.log(Ts), np.log(errs), 1)[0]
    assert slope < -1.5


def test_stable_critical_leading_term_against_oracle():
    Ts = np.array([80.0, 320.0, 1280.0])
    gaps = [abs(tail_probability(-1, -1 / 3, T, 0).raw / oracle_tail(-1, -1 / 3, T).probability - 1) for T in Ts]
    assert gaps[2] < gaps[1] < gaps[0]
    # relative gap of order T^(-1/2): the leading constant itself is right
    slope = np.polyfit(np.log(Ts), np.log(gaps), 1)[0]
    assert abs(slope + 0.5) < 0.15


def test_unstable_zero_exact():
    r = tail_probability(0, 0, 7.0, 0)
    assert r.raw == pytest.approx(2 * ndtr(1.0) - 1, abs=1e-15)
    assert r.regime is RegimeCase.UNSTABLE_ZERO
