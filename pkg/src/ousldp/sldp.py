"""Sharp large-deviation approximations of the MLE tail probabilities.

Each regime gives P ~ exp(-T I(c)) * prefactor(T) * [1 + corrections].
Order 0 is the leading term.  Order 1 is available where a first
correction can be assembled:

* fixed-tilt regimes (tilt a_c in the interior of the domain): an
  Edgeworth-type coefficient built from derivatives of L and H at a_c;
* border regimes (c > theta, |c| < theta, c = -theta): the first
  coefficient of A_T in closed form plus the relative first correction of
  B_T, which is estimated from the inversion oracle at large T and
  extrapolated to T = infinity.

Thresholds c = 0 use the exact Gaussian law of X_T.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import ndtr

from .cgf import big_h, higher_derivatives
from .errors import DomainError, NoExpansionError, OrderError
from .model import RegimeCase, Side, classify_case, rate_function

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Prefactor conventions.  "corrected" uses the constants that match the
#: exact tail; "printed" keeps the uncorrected scalings for comparison.
VARIANTS = ("corrected", "printed")


@dataclass(frozen=True)
class ExpansionConstants:
    """Closed-form constants of one regime; absent fields are None."""

    regime: RegimeCase
    a_c: float | None = None
    sigma_c_sq: float | None = None
    h_of_ac: float | None = None
    k_of_c: float | None = None
    j_of_c: float | None = None
    p_of_c: float | None = None
    gamma1: float | None = None
    delta: float | None = None
    delta1: float | None = None
    beta0: float | None = None
    b_limit: float | None = None


@dataclass(frozen=True)
class TailApproximation:
    regime: RegimeCase
    side: Side
    rate: float
    prefactor_log: float
    corrections: tuple[float, ...]
    order: int
    probability: float
    raw: float
    log_probability: float
    variant: str = "corrected"
    exact: float | None = None
    extras: dict = field(default_factory=dict, compare=False)


def hermite_number(n: int) -> int:
    """H_n(0) for the physicists' Hermite polynomials: H_0 = 1, H_1 = 0, H_n = -2(n-1) H_{n-2}."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if n % 2:
        return 0
    h = 1
    for k in range(2, n + 1, 2):
        h = -2 * (k - 1) * h
    return h


def expansion_constants(theta: float, c: float) -> ExpansionConstants:
    """Constants entering the leading term and first correction of each regime."""
    case = classify_case(theta, c)
    th = theta
    if case.at_theta:
        raise NoExpansionError(f"no sharp expansion at c = theta (regime {case.value})")
    if case.is_zero_threshold:
        raise NoExpansionError(f"c = 0 uses the exact Gaussian route (regime {case.value})")
    if case.fixed_tilt:
        a_c = (c * c - th * th) / (2.0 * c)
        s2 = 1.0 / (2.0 * abs(c))
        return ExpansionConstants(
            case,
            a_c=a_c,
            sigma_c_sq=s2,
            h_of_ac=big_h(th, c, a_c),
            beta0=1.0 / (abs(a_c) * math.sqrt(s2) * SQRT_2PI),
        )
    if case.right_border:
        a_c = 2.0 * (c - th)
        s2 = c * c / (2.0 * (2.0 * c - th) ** 3)
        delta = (3.0 * c - th) / (2.0 * (2.0 * c - th))
        d1 = 1.0 / (a_c * delta * math.sqrt(2.0 * math.pi * math.e))
        return ExpansionConstants(
            case,
            a_c=a_c,
            sigma_c_sq=s2,
            k_of_c=-0.5 * math.log((c - th) * (3.0 * c - th) / (4.0 * c * c)),
            p_of_c=-0.5 * math.log((c - th) / (2.0 * (2.0 * c - th) * (3.0 * c - th))),
            gamma1=c * (c * c - 3.0 * th * c + th * th) / (2.0 * (c - th) * (th - 2.0 * c) * (3.0 * c - th) ** 2),
            delta=delta,
            delta1=d1,
            b_limit=d1,
        )
    if case is RegimeCase.EXPLOSIVE_VALLEY:
        a_c = th / (c + th)
        s2 = c * c / (2.0 * th**3)
        delta = (c + th) / (2.0 * th)
        d1 = 1.0 / (a_c * delta * math.sqrt(2.0 * math.pi * math.e))
        return ExpansionConstants(
            case,
            a_c=a_c,
            sigma_c_sq=s2,
            j_of_c=-0.5 * math.log((th - c) * (th + c) / (4.0 * c * c)),
            p_of_c=-0.5 * math.log((th - c) / (2.0 * th * (c + th))),
            gamma1=-c * (c * c + th * c - th * th) / (2.0 * th * (c - th) * (c + th) ** 2),
            delta=delta,
            delta1=d1,
            b_limit=d1,
        )
    if case is RegimeCase.EXPLOSIVE_CRITICAL:
        return ExpansionConstants(
            case,
            a_c=math.sqrt(th),
            sigma_c_sq=1.0 / (2.0 * th),
            gamma1=3.0 / (8.0 * math.sqrt(th)),
            delta1=math.exp(-0.25) * float(gamma_fn(0.25)) / (2.0 * math.pi),
            b_limit=math.exp(-0.25) * float(gamma_fn(0.75)) / math.pi,
        )
    if case is RegimeCase.STABLE_CRITICAL:
        return ExpansionConstants(case, a_c=-4.0 * th / 3.0, sigma_c_sq=-3.0 / (2.0 * th))
    raise NoExpansionError(f"no expansion constants for regime {case.value}")


def edgeworth_coefficient(theta: float, c: float) -> float:
    """First relative correction b_1 for a tilt fixed at the interior point a_c.

    With l_k = a^k L^(k)(a_c), eta_1 = a H'(a_c), eta_2 = a^2 H''(a_c):
    b_1 = [-1 - eta_2/2 + eta_1 - eta_1^2/2]/l_2
          + [-l_3/2 + l_4/8 + eta_1 l_3/2]/l_2^2 - 5 l_3^2/(24 l_2^3).
    """
    a = (c * c - theta * theta) / (2.0 * c)
    d = higher_derivatives(theta, c, a)
    l2, l3, l4 = a**2 * d.L2, a**3 * d.L3, a**4 * d.L4
    e1, e2 = a * d.H1, a**2 * d.H2
    return (
        (-1.0 - 0.5 * e2 + e1 - 0.5 * e1**2) / l2
        + (-0.5 * l3 + l4 / 8.0 + 0.5 * e1 * l3) / l2**2
        - 5.0 * l3**2 / (24.0 * l2**3)
    )


def _b_scaling(case: RegimeCase) -> tuple[float, float]:
    """(power m with B_T ~ b_limit * T^-m, expansion step s in 1/T^s)."""
    if case.right_border:
        return 1.0, 1.0
    if case is RegimeCase.EXPLOSIVE_VALLEY:
        return 0.0, 1.0
    return 0.0, 0.5  # explosive critical


@functools.lru_cache(maxsize=256)
def b_correction(theta: float, c: float, T0: float = 200.0, levels: int = 4) -> float:
    """Relative first correction kappa in B_T = b_limit T^-m (1 + kappa/T^s + ...).

    kappa(T) = T^s (B_T T^m / b_limit - 1) is computed on T0 * r^k (r = 2, or
    4 when s = 1/2) and extrapolated to T = infinity by a polynomial fit in
    h = T^-s.
    """
    from .inversion import b_factor  # deferred: the oracle builds on this module's siblings

    case = classify_case(theta, c)
    if not (case.right_border or case in (RegimeCase.EXPLOSIVE_VALLEY, RegimeCase.EXPLOSIVE_CRITICAL)):
        raise NoExpansionError(f"no B_T correction in regime {case.value}")
    const = expansion_constants(theta, c)
    m, s = _b_scaling(case)
    ratio = 4.0 if s == 0.5 else 2.0
    Ts = T0 * ratio ** np.arange(levels)
    hs = Ts**-s
    kap = np.array([(b_factor(theta, c, float(T)) * T**m / const.b_limit - 1.0) / h for T, h in zip(Ts, hs)])
    coef = np.polyfit(hs, kap, levels - 1)
    return float(coef[-1])


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


def _finish(case, rate, pref_log, corr, order, raw, log_raw, variant, exact=None, extras=None) -> TailApproximation:
    return TailApproximation(
        case, case.side, rate, pref_log, tuple(corr), order, _clamp(raw), raw, log_raw, variant, exact, extras or {}
    )


def max_order(theta: float, c: float) -> int | None:
    """Highest supported order; None means unbounded (exact-series regimes)."""
    case = classify_case(theta, c)
    if case.at_theta:
        raise NoExpansionError(f"no sharp expansion at c = theta (regime {case.value})")
    if case.is_zero_threshold:
        return None
    if case is RegimeCase.STABLE_CRITICAL:
        return 0
    return 1


def zero_series_term(k: int, x: float) -> float:
    """k-th bracket term (-1)^k x^k / ((2k+1) k!) of the c = 0 series, x = d^2/2."""
    return (-1) ** k * x**k / ((2 * k + 1) * math.factorial(k))


def zero_threshold_exact(
    theta: float, T: float, p: int, variant: str = "corrected", dps: int | None = None
) -> TailApproximation:
    """P(theta_hat <= 0) for theta > 0 from the Gaussian law of X_T.

    The exact value is 2 (Phi(d_T) - 1/2) with d_T = sqrt(T)/sigma_T.  The
    order-p series is the Taylor expansion of the normal CDF at 0,
    2/sqrt(2 pi) sum_k H_2k d^(2k+1) / (2^k (2k+1)!), evaluated at the exact
    d_T ("corrected") or at sqrt(2 theta T) exp(-theta T) ("printed").

    The truncation error quickly drops below double-precision rounding.
    With ``dps`` set, both routes are also evaluated with that many decimal
    digits and ``extras["rel_error"]`` holds the resolved relative gap.
    """
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if p < 0:
        raise DomainError(f"order must be nonnegative, got {p}")
    _check_variant(variant)
    var = math.expm1(2.0 * theta * T) / (2.0 * theta)
    d_exact = math.sqrt(T / var)
    exact = math.erf(d_exact / math.sqrt(2.0))
    d = d_exact if variant == "corrected" else math.sqrt(2.0 * theta * T) * math.exp(-theta * T)
    terms = [hermite_number(2 * k) * d ** (2 * k) / (2**k * math.factorial(2 * k + 1)) for k in range(p + 1)]
    raw = 2.0 * d / SQRT_2PI * math.fsum(terms)
    extras = {"d_T": d_exact, "rel_error": abs(raw - exact) / exact}
    if dps is not None:
        extras["rel_error"] = _zero_series_gap_mp(theta, T, p, variant, dps)
    case = RegimeCase.EXPLOSIVE_ZERO
    log_raw = math.log(raw) if raw > 0 else -math.inf
    return _finish(case, rate_function(theta, 0.0), math.log(2.0 / SQRT_2PI), terms[1:], p, raw, log_raw, variant, exact,
                   extras)


def _zero_series_gap_mp(theta: float, T: float, p: int, variant: str, dps: int) -> float:
    with mpmath.workdps(dps):
        th, t = mpmath.mpf(theta), mpmath.mpf(T)
        d_exact = mpmath.sqrt(t * 2 * th / mpmath.expm1(2 * th * t))
        exact = mpmath.erf(d_exact / mpmath.sqrt(2))
        d = d_exact if variant == "corrected" else mpmath.sqrt(2 * th * t) * mpmath.exp(-th * t)
        x = d * d / 2
        series = 2 * d / mpmath.sqrt(2 * mpmath.pi) * mpmath.fsum(
            (-1) ** k * x**k / ((2 * k + 1) * mpmath.factorial(k)) for k in range(p + 1)
        )
        return float(abs(series - exact) / exact)


def _stable_zero(theta: float, T: float, p: int, variant: str) -> TailApproximation:
    case = RegimeCase.STABLE_ZERO
    rate = rate_function(theta, 0.0)
    terms = [math.factorial(2 * k) / (4**k * theta**k * T**k * math.factorial(k)) for k in range(1, p + 1)]
    pref = 2.0 / (SQRT_2PI * math.sqrt(-2.0 * theta))
    log_raw = -T * rate + math.log(pref) - 0.5 * math.log(T)
    bracket = 1.0 + math.fsum(terms)
    raw = math.exp(log_raw) * bracket
    log_raw = log_raw + math.log(bracket) if bracket > 0 else -math.inf
    var = -math.expm1(2.0 * theta * T) / (-2.0 * theta)
    exact = 2.0 * float(ndtr(-math.sqrt(T / var)))
    return _finish(case, rate, math.log(pref), terms, p, raw, log_raw, variant, exact)


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")


def tail_probability(theta: float, c: float, T: float, order: int = 0, variant: str = "corrected") -> TailApproximation:
    """Sharp asymptotic tail probability on the side fixed by the regime.

    ``variant="printed"`` uses the uncorrected prefactor scalings in the three
    regimes where they disagree with the exact tail (|c| < theta, c = -theta
    and c = theta/3); elsewhere both variants coincide.
    """
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if order < 0:
        raise DomainError(f"order must be nonnegative, got {order}")
    _check_variant(variant)
    case = classify_case(theta, c)
    top = max_order(theta, c)
    if top is not None and order > top:
        raise OrderError(order, top)

    if case is RegimeCase.EXPLOSIVE_ZERO:
        return zero_threshold_exact(theta, T, order, variant)
    if case is RegimeCase.STABLE_ZERO:
        return _stable_zero(theta, T, order, variant)
    if case is RegimeCase.UNSTABLE_ZERO:
        exact = math.erf(1.0 / math.sqrt(2.0))
        return _finish(case, 0.0, math.log(exact), (), order, exact, math.log(exact), variant, exact)

    rate = rate_function(theta, c)
    k = expansion_constants(theta, c)
    corr: list[float] = []

    if case.fixed_tilt:
        pref_log = k.h_of_ac
        log0 = -T * rate + pref_log - math.log(abs(k.a_c) * math.sqrt(k.sigma_c_sq) * SQRT_2PI * math.sqrt(T))
        factor = 1.0
        if order >= 1:
            b1 = edgeworth_coefficient(theta, c)
            corr.append(b1)
            factor += b1 / T
    elif case.right_border or case is RegimeCase.EXPLOSIVE_VALLEY:
        valley = case is RegimeCase.EXPLOSIVE_VALLEY
        pref_log = k.j_of_c if valley else k.k_of_c
        log0 = -T * rate + pref_log - math.log(k.a_c * math.sqrt(k.sigma_c_sq) * SQRT_2PI * math.sqrt(T))
        if valley and variant == "corrected":
            log0 += math.log(T)
        factor = 1.0
        if order >= 1:
            kappa = b_correction(theta, c)
            d1 = k.gamma1 + kappa
            corr += [k.gamma1, kappa, d1]
            factor += d1 / T
    elif case is RegimeCase.EXPLOSIVE_CRITICAL:
        if variant == "corrected":
            pref = (theta * T) ** 0.25 * float(gamma_fn(0.75)) / math.pi
            pref_log = math.log(float(gamma_fn(0.75)) / math.pi) + 0.25 * math.log(theta)
        else:
            pref = float(gamma_fn(0.25)) / (2.0 * math.pi * T**0.25 * k.a_c**0.75 * math.sqrt(k.sigma_c_sq))
            pref_log = math.log(pref) + 0.25 * math.log(T)
        log0 = -T * rate + math.log(pref)
        factor = 1.0
        if order >= 1:
            kappa = b_correction(theta, c)
            f1 = k.gamma1 + kappa
            corr += [k.gamma1, kappa, f1]
            factor += f1 / math.sqrt(T)
    elif case is RegimeCase.STABLE_CRITICAL:
        pref = float(gamma_fn(0.25)) / (2.0 * math.pi * T**0.25 * k.a_c**0.75 * math.sqrt(k.sigma_c_sq))
        if variant == "corrected":
            pref *= 0.5
        pref_log = math.log(pref) + 0.25 * math.log(T)
        log0 = -T * rate + math.log(pref)
        factor = 1.0
    else:  # pragma: no cover - classify_case is total
        raise NoExpansionError(f"unhandled regime {case.value}")

    raw = math.exp(log0) * factor
    log_raw = log0 + math.log(factor) if factor > 0 else -math.inf
    return _finish(case, rate, pref_log, corr, order, raw, log_raw, variant, extras={"leading": math.exp(log0)})
