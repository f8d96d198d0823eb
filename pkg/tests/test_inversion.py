import math

import numpy as np
import pytest

from ousldp.errors import DomainError, NoExpansionError, QuadratureError
from ousldp.inversion import (
    OracleConfig,
    b_t_parseval,
    choose_tilt,
    d_tail_bound,
    oracle_tail,
)
from ousldp.model import RegimeCase, Side
from ousldp.sldp import tail_probability, zero_threshold_exact

# Frozen with scripts/freeze_reference_values.py: Gil-Pelaez inversion of the
# untilted characteristic function in its entire-function form (no Parseval
# split, no tilt), 2e6 and 4e6 node grids agreeing to ~1e-15.  The oracle's
# quadrature tolerance is 1e-10, hence rel=1e-8 here.
REFERENCE = [
    (1.0, 0.5, 5.0, Side.LOWER, 0.028801935862949324),
    (1.0, -1.0, 5.0, Side.LOWER, 0.006002381093913822),
    (1.0, -2.0, 3.0, Side.LOWER, 0.017835057468304383),
    (-1.0, -2.0, 10.0, Side.LOWER, 0.08268609057005538),
    (-1.0, -0.9, 10.0, Side.UPPER, 0.3287808428219804),
    (-1.0, -1.0 / 3.0, 10.0, Side.UPPER, 0.00519504860300074),
    (0.0, -1.0, 5.0, Side.LOWER, 0.12447966790304466),
    (1.0, 0.5, 10.0, Side.LOWER, 0.00027755366191062336),
]


@pytest.mark.parametrize("theta, c, T, side, expected", REFERENCE)
def test_matches_independent_inversion(theta, c, T, side, expected):
    r = oracle_tail(theta, c, T)
    assert r.side is side
    assert r.probability == pytest.approx(expected, rel=1e-8)
    assert r.probability == pytest.approx(r.a_factor * r.b_factor, rel=1e-14)
    assert r.extras["imag_residue"] <= 1e-10 * abs(r.b_factor)
    assert r.d_bound >= 0


@pytest.mark.parametrize(
    "theta, c",
    [(1, 2), (1, 0.5), (1, -1), (1, -2), (-1, -2), (-1, -0.5), (-1, 1), (-1, -1 / 3), (0, 1), (0, -1)],
)
def test_tilt_table(theta, c):
    T = 16.0
    tilt = choose_tilt(theta, c, T)
    assert tilt.alpha * tilt.beta < 0
    case = tilt.regime
    if case.fixed_tilt:
        assert tilt.alpha == pytest.approx((c * c - theta * theta) / (2 * c))
        assert abs(tilt.beta) == pytest.approx(math.sqrt(T / (2 * abs(c))))
    elif case is RegimeCase.EXPLOSIVE_CRITICAL:
        assert tilt.beta == pytest.approx(4.0)
    elif case is RegimeCase.EXPLOSIVE_VALLEY:
        assert tilt.beta == T
    elif case.right_border:
        assert tilt.beta == -T


def test_zero_threshold_delegation():
    r = oracle_tail(1.0, 0.0, 5.0)
    assert r.probability == zero_threshold_exact(1.0, 5.0, 0).exact
    assert r.side is Side.LOWER
    s = oracle_tail(-1.0, 0.0, 10.0)
    assert s.side is Side.UPPER and 0 < s.probability < 1


def test_no_route_at_theta():
    with pytest.raises(NoExpansionError):
        oracle_tail(1.0, 1.0, 10.0)


@pytest.mark.parametrize("theta, c, T", [(1, 2, 10), (1, 0.5, 10), (1, -1, 10), (-1, -2, 10), (-1, 1, 5)])
def test_invariant_under_refinement(theta, c, T):
    base = oracle_tail(theta, c, T)
    wider = oracle_tail(theta, c, T, OracleConfig(s=2 * base.extras["s"] / 1.0))
    tighter = oracle_tail(theta, c, T, OracleConfig(rtol=5e-11))
    assert wider.probability == pytest.approx(base.probability, rel=1e-8)
    assert tighter.probability == pytest.approx(base.probability, rel=1e-8)


def test_growth_rule_is_positive():
    for theta, c in ((1, 2), (1, -1), (-1, -2)):
        assert oracle_tail(theta, c, 20.0).growth_constant > 0


def test_remainder_bound_decays_with_T():
    Ts = np.array([5.0, 10.0, 20.0, 40.0])
    logs = []
    for T in Ts:
        tilt = choose_tilt(1.0, 2.0, T)
        logs.append(math.log(d_tail_bound(1.0, 2.0, T, tilt.alpha, tilt.beta, T ** tilt.nu)))
    assert np.all(np.diff(logs) < 0)
    # log bound ~ -D T^nu with nu = 2/3
    slope = np.polyfit(Ts ** (2 / 3), logs, 1)[0]
    assert slope < 0


def test_parseval_preconditions():
    with pytest.raises(DomainError):
        b_t_parseval(1.0, 2.0, 10.0, 1.0, 10.0, 5.0)
    with pytest.raises(DomainError):
        b_t_parseval(1.0, 2.0, 10.0, 1.0, -10.0, 0.0)


def test_quadrature_failure_names_subinterval():
    tilt = choose_tilt(1.0, 2.0, 10.0)
    with pytest.raises(QuadratureError, match="subinterval"):
        b_t_parseval(1.0, 2.0, 10.0, tilt.alpha, tilt.beta, 500.0, rtol=2e-14, atol=0.0, limit=2)


def test_stable_left_order_zero_gap_shrinks():
    gaps = [abs(tail_probability(-1, -2, T, 0).raw / oracle_tail(-1, -2, T).probability - 1) for T in (10, 20, 40, 80)]
    assert all(g1 < g0 for g0, g1 in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.05
