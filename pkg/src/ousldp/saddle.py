"""Time-varying saddlepoint a_T solving L'(a) + H'(a)/T = 0.

After clearing denominators the equation reads

    P(a) = T phi (phi - c)(phi + a + theta) - c (a + theta) + phi^2 = 0,

with phi = phi(a).  P stays finite up to the domain border, which makes it
the better-conditioned form for root finding.  The reported residual is
P(a_T)/T, i.e. the equation with coefficients that stay O(1) as T grows;
the raw P carries a rounding floor of order T * ulp(a).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cgf import BOUNDARY_GUARD, higher_derivatives
from .errors import DomainError, NoSeriesError, SolverError
from .model import RegimeCase, classify_case, effective_domain

RESIDUAL_TOL = 1e-12


class SeriesScale(str, enum.Enum):
    INVERSE_T = "InverseT"
    INVERSE_SQRT_T = "InverseSqrtT"


@dataclass(frozen=True)
class SeriesCoeffs:
    """a_T ~ sum a_k eps^k and phi(a_T) ~ sum phi_k eps^k, eps = 1/T or 1/sqrt(T)."""

    scale: SeriesScale
    a_coeffs: tuple[float, ...]
    phi_coeffs: tuple[float, ...]

    @property
    def step(self) -> float:
        return 1.0 if self.scale is SeriesScale.INVERSE_T else 0.5

    def a_at(self, T: float, terms: int | None = None) -> float:
        """Partial sum of the a-series with ``terms`` coefficients (all by default)."""
        coeffs = self.a_coeffs if terms is None else self.a_coeffs[:terms]
        eps = T ** -self.step
        return sum(a * eps**k for k, a in enumerate(coeffs))

    def phi_at(self, T: float, terms: int | None = None) -> float:
        coeffs = self.phi_coeffs if terms is None else self.phi_coeffs[:terms]
        eps = T ** -self.step
        return sum(p * eps**k for k, p in enumerate(coeffs))


@dataclass(frozen=True)
class SaddleSolution:
    a_T: float
    phi_at: float
    residual: float
    iterations: int
    regime: RegimeCase
    series: SeriesCoeffs | None = field(default=None, compare=False)


def series_coeffs(theta: float, c: float) -> SeriesCoeffs:
    """Asymptotic coefficients of a_T and phi(a_T).

    Border-convergent regimes (c > theta, |c| < theta, c = -theta) carry
    three terms.  Fixed-tilt regimes carry a_0 = a_c and the first drift
    a_1 = -H'(a_c)/L''(a_c); the stable critical threshold c = theta/3 has a
    half-power law with a_1 = phi_1 = -sqrt(-theta/3).
    """
    case = classify_case(theta, c)
    th = theta
    if case.right_border:
        a = (
            2 * (c - th),
            (th - 2 * c) / (3 * c - th),
            -c * (c * c - 5 * th * c + 2 * th * th) / (2 * (c - th) * (3 * c - th) ** 3),
        )
        p = (
            th - 2 * c,
            c / (3 * c - th),
            c * c * (4 * c * c - 9 * th * c + 3 * th * th) / (2 * (c - th) * (2 * c - th) * (3 * c - th) ** 3),
        )
        return SeriesCoeffs(SeriesScale.INVERSE_T, a, p)
    if case is RegimeCase.EXPLOSIVE_VALLEY:
        a = (
            0.0,
            -th / (c + th),
            -c * (c * c + 3 * th * c - 2 * th * th) / (2 * (c - th) * (c + th) ** 3),
        )
        p = (
            -th,
            c / (c + th),
            c * c * (2 * c * c + 3 * th * c - 3 * th * th) / (2 * th * (c - th) * (c + th) ** 3),
        )
        return SeriesCoeffs(SeriesScale.INVERSE_T, a, p)
    if case is RegimeCase.EXPLOSIVE_CRITICAL:
        r = math.sqrt(th)
        return SeriesCoeffs(SeriesScale.INVERSE_SQRT_T, (0.0, -r, -0.125), (-th, -r, 0.375))
    if case.fixed_tilt:
        a0 = (c * c - th * th) / (2 * c)
        d = higher_derivatives(th, c, a0)
        a1 = -d.H1 / d.L2
        p0 = -abs(c)
        return SeriesCoeffs(SeriesScale.INVERSE_T, (a0, a1), (p0, c * a1 / p0))
    if case is RegimeCase.STABLE_CRITICAL:
        r = math.sqrt(-th / 3.0)
        return SeriesCoeffs(SeriesScale.INVERSE_SQRT_T, (-4.0 * th / 3.0, -r), (th / 3.0, -r))
    raise NoSeriesError(f"no saddlepoint series in regime {case.value}")


def implicit_residual(theta: float, c: float, a: float, T: float) -> float:
    """P(a) = T phi (phi - c)(phi + a + theta) - c (a + theta) + phi^2."""
    q = theta * theta + 2.0 * a * c
    if not q > 0:
        raise DomainError(f"theta^2 + 2ac > 0 violated at a={a}")
    phi = -math.sqrt(q)
    return T * phi * (phi - c) * (phi + a + theta) - c * (a + theta) + phi * phi


def normalized_residual(theta: float, c: float, a: float, T: float) -> float:
    """P(a)/T."""
    return implicit_residual(theta, c, a, T) / T


def _residual_slope(theta: float, c: float, a: float, T: float) -> float:
    phi = -math.sqrt(theta * theta + 2.0 * a * c)
    dphi = c / phi
    s = phi + a + theta
    inner = dphi * (phi - c) * s + phi * dphi * s + phi * (phi - c) * (dphi + 1.0)
    return T * inner - c + 2.0 * phi * dphi


def _scan_points(lo: float, hi: float, guess: float) -> np.ndarray:
    width = hi - lo
    pts = [np.linspace(lo, hi, 257)[1:-1]]
    ladder = width * np.logspace(-13, -0.5, 60)
    pts += [lo + ladder, hi - ladder]
    if lo < guess < hi:
        near = np.abs(guess - np.array([lo, hi])).min() * np.logspace(-6, 0, 25)
        pts += [guess - near, guess + near]
    out = np.unique(np.concatenate(pts))
    return out[(out > lo) & (out < hi)]


def solve_saddle(theta: float, c: float, T: float, max_iter: int = 200) -> SaddleSolution:
    """Find a_T inside the limiting domain.

    The truncated series gives the initial guess.  A sign change of P is
    bracketed by scanning the domain (densely near both edges) and the
    bracket closest to the guess is refined by Newton steps that fall back to
    bisection whenever a step leaves the bracket.
    """
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    case = classify_case(theta, c)
    try:
        series = series_coeffs(theta, c)
    except NoSeriesError:
        raise NoSeriesError(f"regime {case.value} has no saddlepoint") from None
    dom = effective_domain(theta, c)
    hi = dom.upper
    guess = series.a_at(T, 2)
    lo = dom.lower
    if math.isinf(lo):
        lo = min(guess, hi) - 10.0 * max(1.0, abs(hi), abs(guess - hi))
    if not lo < guess < hi:
        guess = 0.5 * (lo + hi)

    pts = _scan_points(lo, hi, guess)
    vals = np.array([implicit_residual(theta, c, x, T) for x in pts])
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if flips.size == 0:
        raise SolverError(
            f"saddle-unresolved: no sign change of the implicit equation on ({lo}, {hi}) "
            f"for theta={theta}, c={c}, T={T}; values span [{vals.min():.3g}, {vals.max():.3g}]"
        )
    mids = 0.5 * (pts[flips] + pts[flips + 1])
    k = flips[np.argmin(np.abs(mids - guess))]
    left, right = float(pts[k]), float(pts[k + 1])
    f_left = implicit_residual(theta, c, left, T)

    x = min(max(guess, left), right)
    if not left < x < right:
        x = 0.5 * (left + right)
    fx = implicit_residual(theta, c, x, T)
    it = 0
    for it in range(1, max_iter + 1):
        if fx == 0.0:
            break
        if (fx > 0) == (f_left > 0):
            left, f_left = x, fx
        else:
            right = x
        slope = _residual_slope(theta, c, x, T)
        step_ok = slope != 0 and math.isfinite(slope)
        x_new = x - fx / slope if step_ok else math.nan
        if not (left < x_new < right):
            x_new = 0.5 * (left + right)
        if x_new == x or right - left <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            x = x_new
            fx = implicit_residual(theta, c, x, T)
            break
        x = x_new
        fx = implicit_residual(theta, c, x, T)
        if abs(fx) < 1e-3 * RESIDUAL_TOL * T:
            break

    res = fx / T
    if not abs(res) < RESIDUAL_TOL:
        raise SolverError(f"saddle-unresolved: residual {res:.3e} after {it} iterations at a={x}")
    if dom.distance_to_edge(x) < BOUNDARY_GUARD:
        raise SolverError(f"saddle-unresolved: a_T={x} within {BOUNDARY_GUARD} of the domain edge")
    phi = -math.sqrt(theta * theta + 2.0 * x * c)
    return SaddleSolution(x, phi, res, it, case, series)
