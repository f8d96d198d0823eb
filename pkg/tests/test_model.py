import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ousldp.errors import DomainError
from ousldp.model import (
    SNAP_TOL,
    EffectiveDomain,
    ModelSpec,
    RegimeCase,
    Side,
    classify_case,
    effective_domain,
    finite_T_domain,
    in_limit_domain,
    rate_function,
)

from .strategies import theta_c


@pytest.mark.parametrize(
    "theta, c, expected",
    [
        (1, 2, RegimeCase.EXPLOSIVE_RIGHT),
        (-1, -1 / 3, RegimeCase.STABLE_CRITICAL),
        (1, -1, RegimeCase.EXPLOSIVE_CRITICAL),
        (1, 0.5, RegimeCase.EXPLOSIVE_VALLEY),
        (1, -2, RegimeCase.EXPLOSIVE_LEFT),
        (1, 0, RegimeCase.EXPLOSIVE_ZERO),
        (1, 1, RegimeCase.EXPLOSIVE_AT_THETA),
        (-1, -2, RegimeCase.STABLE_LEFT),
        (-1, -0.5, RegimeCase.STABLE_INNER),
        (-1, 0.5, RegimeCase.STABLE_RIGHT),
        (-1, 0, RegimeCase.STABLE_ZERO),
        (-1, -1, RegimeCase.STABLE_AT_THETA),
        (0, -1, RegimeCase.UNSTABLE_LEFT),
        (0, 1, RegimeCase.UNSTABLE_RIGHT),
        (0, 0, RegimeCase.UNSTABLE_ZERO),
    ],
)
def test_classify_examples(theta, c, expected):
    assert classify_case(theta, c) is expected


def test_snapping_tolerance():
    assert classify_case(1.0, 1.0 + 0.5 * SNAP_TOL) is RegimeCase.EXPLOSIVE_AT_THETA
    assert classify_case(1.0, 1.0 + 10 * SNAP_TOL) is RegimeCase.EXPLOSIVE_RIGHT
    assert classify_case(-1.0, -1 / 3 + 0.5 * SNAP_TOL) is RegimeCase.STABLE_CRITICAL


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_classification_is_total_and_consistent(theta, c):
    case = classify_case(theta, c)
    assert isinstance(case.side, Side)
    if case is RegimeCase.EXPLOSIVE_RIGHT:
        assert theta > 0 and c > theta
    if case is RegimeCase.EXPLOSIVE_LEFT:
        assert theta > 0 and c < -theta
    if case is RegimeCase.EXPLOSIVE_VALLEY:
        assert abs(c) < theta
    if case is RegimeCase.STABLE_LEFT:
        assert theta < 0 and c < theta
    if case is RegimeCase.STABLE_INNER:
        assert theta < c < theta / 3
    if case is RegimeCase.STABLE_RIGHT:
        assert theta < 0 and c > theta / 3


def test_non_finite_inputs_rejected():
    with pytest.raises(DomainError):
        classify_case(math.nan, 1.0)
    with pytest.raises(DomainError):
        rate_function(1.0, math.inf)
    with pytest.raises(DomainError):
        ModelSpec(1.0, 0.0)
    assert ModelSpec(-1.0, 3.0).kind == "stable"


@pytest.mark.parametrize("theta, c, expected", [(-1, -1, 0.0), (1, 0.5, 1.0), (0, -2, 0.5), (1, 2, 3.0), (1, -2, 1.125)])
def test_rate_examples(theta, c, expected):
    assert rate_function(theta, c) == pytest.approx(expected, abs=1e-15)


@given(theta_c(gap=1e-3))
def test_rate_nonnegative_and_zero_only_at_theta(tc):
    theta, c = tc
    assert rate_function(theta, c) > 0


def test_rate_jump_at_explosive_theta():
    for theta in (0.5, 1.0, 2.0):
        assert rate_function(theta, theta) == 0.0
        assert rate_function(theta, theta - 1e-6) == pytest.approx(theta, abs=1e-12)
        assert rate_function(theta, theta + 1e-6) == pytest.approx(theta, abs=3e-6)


@pytest.mark.parametrize(
    "theta, c, lo, hi",
    [(1, 2, 0.0, 2.0), (1, -2, -math.inf, 0.0), (1, 0.4, -1.25, 0.0), (-1, 1, -0.5, 4.0), (-1, -1 / 3, -math.inf, 4 / 3)],
)
def test_effective_domain_examples(theta, c, lo, hi):
    dom = effective_domain(theta, c)
    assert dom.lower == pytest.approx(lo) and dom.upper == pytest.approx(hi)


@given(theta_c(), st.floats(0.001, 0.999))
def test_domain_membership_matches_inequalities(tc, frac):
    theta, c = tc
    dom = effective_domain(theta, c)
    lo = dom.lower if math.isfinite(dom.lower) else dom.upper - 50.0
    hi = dom.upper if math.isfinite(dom.upper) else dom.lower + 50.0
    a = lo + frac * (hi - lo)
    if a in dom:
        q = theta * theta + 2 * a * c
        assert q > 0 and a + theta < math.sqrt(q)


@given(theta_c())
def test_domain_edges_are_tight(tc):
    theta, c = tc
    dom = effective_domain(theta, c)
    for edge, step in ((dom.lower, -1e-6), (dom.upper, 1e-6)):
        if math.isfinite(edge):
            assert not in_limit_domain(theta, c, edge + step * max(1.0, abs(edge)))


def test_finite_T_domain_contains_limit_and_converges():
    assert finite_T_domain(1, -2, 5).lower == -math.inf
    prev = math.inf
    for T in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0):
        fin = finite_T_domain(1, 2, T)
        assert fin.lower <= 0.0 and fin.upper >= 2.0
        # the outward shift is about 3 * 2 exp(-6T); past T ~ 4 it drops below double resolution at 2
        if T <= 2.0:
            assert fin.upper > 2.0
        assert fin.upper <= prev
        prev = fin.upper
    assert prev == pytest.approx(2.0, abs=1e-10)


@given(theta_c(gap=0.1), st.sampled_from([1.0, 3.0, 10.0]))
def test_finite_T_domain_superset(tc, T):
    theta, c = tc
    lim = effective_domain(theta, c)
    fin = finite_T_domain(theta, c, T)
    assert fin.lower <= lim.lower and fin.upper >= lim.upper


def test_effective_domain_rejects_zero_threshold():
    with pytest.raises(DomainError):
        effective_domain(1.0, 0.0)
    with pytest.raises(DomainError):
        EffectiveDomain(1.0, 1.0)
