import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ousldp.errors import NoSeriesError
from ousldp.model import RegimeCase, finite_T_domain
from ousldp.saddle import RESIDUAL_TOL, SeriesScale, normalized_residual, series_coeffs, solve_saddle

from .strategies import theta_c


def test_series_examples():
    assert series_coeffs(1, 2).a_coeffs[1] == pytest.approx(-3 / 5)
    assert series_coeffs(1, 0.5).a_coeffs[1] == pytest.approx(-2 / 3)
    s = series_coeffs(4, -4)
    assert s.scale is SeriesScale.INVERSE_SQRT_T
    assert s.a_coeffs[1:] == pytest.approx((-2.0, -1 / 8))
    assert s.phi_coeffs[2] == pytest.approx(3 / 8)


@pytest.mark.parametrize("theta, c", [(1, 2), (1, 3.5), (-1, 1), (0, 0.7), (1, 0.5), (2, -1.2), (1, -2), (-1, -0.6)])
def test_link_relations(theta, c):
    s = series_coeffs(theta, c)
    assert s.scale is SeriesScale.INVERSE_T
    p, a = s.phi_coeffs, s.a_coeffs
    assert a[0] == pytest.approx((p[0] ** 2 - theta**2) / (2 * c), abs=1e-14)
    assert a[1] == pytest.approx(p[0] * p[1] / c, abs=1e-14)
    if len(a) > 2:
        assert a[2] == pytest.approx((2 * p[0] * p[2] + p[1] ** 2) / (2 * c), abs=1e-14)


def test_no_series_at_zero_threshold():
    with pytest.raises(NoSeriesError):
        series_coeffs(1, 0)
    with pytest.raises(NoSeriesError):
        solve_saddle(1, 1, 10)


def test_right_border_convergence():
    Ts = np.array([50.0, 100.0, 200.0, 400.0])
    gaps = np.array([abs(T * (solve_saddle(1, 2, T).a_T - 2) + 0.6) for T in Ts])
    slope = np.polyfit(np.log(Ts), np.log(gaps), 1)[0]
    assert abs(slope + 1) < 0.15
    assert np.ptp(gaps * Ts) < 0.05 * np.mean(gaps * Ts)


def test_critical_convergence():
    Ts = np.array([50.0, 100.0, 200.0, 400.0, 800.0])
    gaps = np.array([abs(math.sqrt(T) * solve_saddle(1, -1, T).a_T + 1) for T in Ts])
    slope = np.polyfit(np.log(np.sqrt(Ts)), np.log(gaps), 1)[0]
    assert abs(slope + 1) < 0.15


def test_stable_critical_convergence():
    theta = -1.0
    vals = [math.sqrt(T) * (solve_saddle(theta, theta / 3, T).a_T + 4 * theta / 3) for T in (100.0, 400.0, 1600.0)]
    assert abs(vals[-1] + math.sqrt(1 / 3)) < abs(vals[0] + math.sqrt(1 / 3))
    assert vals[-1] == pytest.approx(-math.sqrt(1 / 3), abs=0.05)


@pytest.mark.parametrize(
    "theta, c, order",
    [(1, 2, 3.0), (-1, 1, 3.0), (1, 0.5, 3.0), (0, 1, 3.0), (1, -1, 1.5)],
)
def test_series_truncation_order(theta, c, order):
    s = series_coeffs(theta, c)
    Ts = np.array([200.0, 400.0, 800.0, 1600.0])
    err = np.array([abs(solve_saddle(theta, c, T).a_T - s.a_at(T)) for T in Ts])
    slope = np.polyfit(np.log(Ts), np.log(err), 1)[0]
    assert abs(slope + order) < 0.15


def test_implicit_limit_right_border():
    theta, c = 1.0, 2.0
    T = 2000.0
    sol = solve_saddle(theta, c, T)
    assert T * (sol.phi_at + sol.a_T + theta) == pytest.approx((c - theta) / (theta - 3 * c), rel=5e-3)


@given(theta_c(gap=0.1), st.floats(20.0, 5000.0))
def test_solver_contract(tc, T):
    theta, c = tc
    if c == 0:
        return
    sol = solve_saddle(theta, c, T)
    assert abs(sol.residual) < RESIDUAL_TOL
    assert abs(normalized_residual(theta, c, sol.a_T, T)) < RESIDUAL_TOL
    assert sol.a_T in finite_T_domain(theta, c, T)
    assert sol.phi_at < 0
    if sol.regime in (RegimeCase.EXPLOSIVE_RIGHT, RegimeCase.STABLE_RIGHT, RegimeCase.UNSTABLE_RIGHT):
        assert sol.a_T < 2 * (c - theta)
