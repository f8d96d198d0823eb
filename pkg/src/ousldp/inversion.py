"""Fourier-inversion oracle for the exact tail probability.

Under the tilt alpha the tail splits as P = A_T * B_T with
A_T = exp(T L_T(alpha)) in closed form and

    B_T = -1/(2 pi) * integral Phi_T(u) / (alpha beta + i u) du,

Phi_T being the characteristic function of U_T = Z_T/beta under the
tilted law.  The integral is truncated to |u| <= s_T (the retained part is
C_T) and the discarded part D_T is bounded through the L^2 majorant of
|Phi_T|^2 and Cauchy-Schwarz.

For beta > 0 the event is {Z <= 0}, for beta < 0 it is {Z >= 0}; in both
cases alpha * beta < 0.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .cgf import branch_continuous, char_bound, check_limit_domain, log_mgf
from .errors import DomainError, NoExpansionError, QuadratureError
from .model import RegimeCase, Side, classify_case
from .saddle import solve_saddle


@dataclass(frozen=True)
class OracleConfig:
    """Quadrature settings.

    ``s`` fixes the truncation constant in s_T = s * T**nu; when None it is
    doubled from ``s_start`` until the D_T bound falls below
    ``d_rtol`` times the retained integral.
    """

    rtol: float = 1e-10
    atol: float = 1e-300
    s: float | None = None
    s_start: float = 1.0
    d_rtol: float = 1e-10
    max_doublings: int = 60
    limit: int = 400


@dataclass(frozen=True)
class TiltChoice:
    alpha: float
    beta: float
    side: Side
    nu: float  # s_T = s * T**nu
    regime: RegimeCase


@dataclass(frozen=True)
class ParsevalResult:
    c_factor: float
    d_bound: float
    imag_residue: float
    quad_error: float
    s_T: float


@dataclass(frozen=True)
class InversionResult:
    a_t_used: float
    beta_used: float
    a_factor: float
    b_factor: float
    d_bound: float
    probability: float
    quadrature_error: float
    side: Side
    regime: RegimeCase
    log_probability: float
    s_T: float = math.nan
    growth_constant: float = math.nan
    extras: dict = field(default_factory=dict, compare=False)


def choose_tilt(theta: float, c: float, T: float) -> TiltChoice:
    """Tilt alpha_T and scaling beta_T for the regime of (theta, c).

    Fixed-tilt regimes use a_c with beta = +/- sigma_c sqrt(T); the others
    use the saddle a_T with beta = sqrt(T) (c = -theta), T (|c| < theta),
    -T (c > theta) or -sqrt(T) (c = theta/3).
    """
    case = classify_case(theta, c)
    if case.is_zero_threshold or case.at_theta:
        raise NoExpansionError(f"no tilted inversion route in regime {case.value}")
    sq = math.sqrt(T)
    if case.fixed_tilt:
        a_c = (c * c - theta * theta) / (2.0 * c)
        sigma = math.sqrt(-1.0 / (2.0 * c)) if c < 0 else math.sqrt(1.0 / (2.0 * abs(c)))
        beta = sigma * sq if case.side is Side.LOWER else -sigma * sq
        return TiltChoice(a_c, beta, case.side, 1.0 / 6.0, case)
    a_T = solve_saddle(theta, c, T).a_T
    if case is RegimeCase.EXPLOSIVE_CRITICAL:
        return TiltChoice(a_T, sq, case.side, 1.0 / 6.0, case)
    if case is RegimeCase.STABLE_CRITICAL:
        return TiltChoice(a_T, -sq, case.side, 1.0 / 6.0, case)
    if case is RegimeCase.EXPLOSIVE_VALLEY:
        return TiltChoice(a_T, T, case.side, 2.0 / 3.0, case)
    return TiltChoice(a_T, -T, case.side, 2.0 / 3.0, case)


def _make_integrand(theta: float, c: float, T: float, alpha: float, beta: float):
    """Scalar u -> (1 + iu/(alpha beta))^-1 Phi_T(u), built from cancellation-free increments."""
    q = theta * theta + 2.0 * alpha * c
    phi_a = -math.sqrt(q)
    h_a = (alpha + theta) / phi_a
    one_h_a = 1.0 + h_a
    e_a = (1.0 - h_a) / one_h_a * math.exp(2.0 * phi_a * T)
    log1p_e_a = math.log1p(e_a)
    ab = alpha * beta

    def g(u: float) -> complex:
        v = 1j * u / beta
        w = 2.0 * c * v / q
        dphi = phi_a * w / (cmath.sqrt(1.0 + w) + 1.0)
        phi_z = phi_a + dphi
        d_l = -0.5 * (v - dphi)
        h_z = (alpha + v + theta) / phi_z
        one_h_z = 1.0 + h_z
        e_z = (1.0 - h_z) / one_h_z * cmath.exp(2.0 * phi_z * T)
        lg = T * d_l - 0.5 * cmath.log(one_h_z / one_h_a) - 0.5 * (cmath.log(1.0 + e_z) - log1p_e_a)
        return cmath.exp(lg) / (1.0 + 1j * u / ab)

    return g


def _quad(f, a: float, b: float, rtol: float, atol: float, limit: int) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info, *rest = integrate.quad(f, a, b, epsrel=rtol, epsabs=atol, limit=limit, full_output=1)
    ier = rest[0] if rest else 0
    if ier not in (0,) and not (err <= max(atol, rtol * abs(val)) * 10):
        last = info.get("last", 0)
        worst = ""
        if last:
            k = int(np.argmax(info["elist"][:last]))
            worst = f"; worst subinterval [{info['alist'][k]:.6g}, {info['blist'][k]:.6g}] err {info['elist'][k]:.3g}"
        raise QuadratureError(f"quadrature on [{a:.6g}, {b:.6g}] did not converge (ier={ier}, err={err:.3g}){worst}")
    return val, err


def _segments(s_T: float) -> list[tuple[float, float]]:
    edges = [0.0]
    x = 1.0
    while x < s_T:
        edges.append(x)
        x *= 2.0
    edges.append(s_T)
    return list(zip(edges[:-1], edges[1:]))


def d_tail_bound(theta: float, c: float, T: float, alpha: float, beta: float, s_T: float) -> float:
    """Cauchy-Schwarz bound on the discarded part |u| > s_T of the Parseval integral."""
    v0 = s_T / abs(beta)

    def f(v: float) -> float:
        return char_bound(theta, c, alpha, v, T)

    total = 0.0
    lo = v0
    width = max(v0, 1e-3)
    for _ in range(200):
        hi = lo + width
        val, _ = _quad(f, lo, hi, 1e-8, 0.0, 200)
        total += val
        if val <= 1e-17 * total or val == 0.0:
            break
        lo = hi
        width *= 2.0
    tail_phi_sq = 2.0 * abs(beta) * total  # integral over |u| > s_T of the majorant
    return math.sqrt(tail_phi_sq / (4.0 * math.pi * abs(alpha * beta)))


def b_t_parseval(
    theta: float,
    c: float,
    T: float,
    alpha: float,
    beta: float,
    s_T: float,
    rtol: float = 1e-10,
    atol: float = 1e-300,
    limit: int = 400,
) -> ParsevalResult:
    """Truncated Parseval integral C_T and the bound on the remainder D_T."""
    if not s_T > 0:
        raise DomainError(f"s_T must be positive, got {s_T}")
    if not alpha * beta < 0:
        raise DomainError(f"alpha * beta < 0 required (alpha={alpha}, beta={beta})")
    check_limit_domain(theta, c, alpha)
    grid = np.unique(np.concatenate([np.linspace(0.0, s_T, 4001), s_T * np.logspace(-8, 0, 4001)]))
    if not branch_continuous(theta, c, T, alpha, beta, grid):
        raise QuadratureError("log arguments cross the principal cut on the integration range")
    g = _make_integrand(theta, c, T, alpha, beta)

    re_total = im_pos = im_neg = 0.0
    err_total = 0.0
    scale = None
    for lo, hi in _segments(s_T):
        floor = atol if scale is None else max(atol, 1e-3 * rtol * scale)
        r, er = _quad(lambda u: g(u).real, lo, hi, rtol, floor, limit)
        ip, ei = _quad(lambda u: g(u).imag, lo, hi, rtol, floor, limit)
        im, em = _quad(lambda u: g(-u).imag, lo, hi, rtol, floor, limit)
        re_total += r
        im_pos += ip
        im_neg += im
        err_total += er + 0.5 * (ei + em)
        if scale is None:
            scale = abs(r)
    pref = -1.0 / (2.0 * math.pi * alpha * beta)
    c_factor = pref * 2.0 * re_total
    imag = abs(pref * (im_pos + im_neg))
    dbound = d_tail_bound(theta, c, T, alpha, beta, s_T)
    return ParsevalResult(c_factor, dbound, imag, abs(pref) * 2.0 * err_total, s_T)


def zero_threshold_probability(theta: float, T: float) -> tuple[Side, float]:
    """Exact P(theta_hat <= 0) (theta >= 0) or P(theta_hat >= 0) (theta < 0).

    X_T is centred Gaussian with variance sigma_T^2, and {theta_hat <= 0} is
    {X_T^2 <= T}.
    """
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if theta == 0:
        var = T
    else:
        var = math.expm1(2.0 * theta * T) / (2.0 * theta)
    d = math.sqrt(T / var)
    if theta < 0:
        return Side.UPPER, 2.0 * float(ndtr(-d))
    return Side.LOWER, math.erf(d / math.sqrt(2.0))


def oracle_tail(theta: float, c: float, T: float, config: OracleConfig | None = None) -> InversionResult:
    """Exact tail probability on the side given by the regime of (theta, c)."""
    cfg = config or OracleConfig()
    case = classify_case(theta, c)
    if case.is_zero_threshold:
        side, p = zero_threshold_probability(theta, T)
        return InversionResult(0.0, math.nan, 1.0, p, 0.0, p, 0.0, side, case, math.log(p) if p > 0 else -math.inf)
    if case.at_theta:
        raise NoExpansionError(f"no oracle route at c = theta (regime {case.value})")
    tilt = choose_tilt(theta, c, T)
    alpha, beta = tilt.alpha, tilt.beta
    log_a = log_mgf(theta, c, alpha, T)

    def run(s: float) -> ParsevalResult:
        return b_t_parseval(theta, c, T, alpha, beta, s * T**tilt.nu, cfg.rtol, cfg.atol, cfg.limit)

    if cfg.s is not None:
        s = cfg.s
        res = run(s)
    else:
        s = cfg.s_start
        provisional = run(s).c_factor
        target = cfg.d_rtol * abs(provisional)
        for _ in range(cfg.max_doublings):
            if d_tail_bound(theta, c, T, alpha, beta, s * T**tilt.nu) <= target:
                break
            s *= 2.0
        res = run(s)

    s_T = res.s_T
    growth = min(T * s_T**2 / beta**2, T * math.sqrt(s_T) / math.sqrt(abs(beta))) / T ** (1.0 / 3.0)
    if not (growth > 0 and math.isfinite(growth)):
        raise QuadratureError(f"truncation growth check failed (value {growth})")
    prob = math.exp(log_a) * res.c_factor
    log_p = log_a + math.log(res.c_factor) if res.c_factor > 0 else -math.inf
    err = math.exp(log_a) * (res.quad_error + res.d_bound + res.imag_residue)
    return InversionResult(
        alpha,
        beta,
        math.exp(log_a),
        res.c_factor,
        res.d_bound,
        prob,
        err,
        tilt.side,
        case,
        log_p,
        s_T,
        growth,
        {"imag_residue": res.imag_residue, "s": s, "log_a_factor": log_a},
    )


def b_factor(theta: float, c: float, T: float, config: OracleConfig | None = None) -> float:
    """B_T alone (the retained Parseval integral at the regime tilt)."""
    cfg = config or OracleConfig()
    tilt = choose_tilt(theta, c, T)
    if cfg.s is not None:
        return b_t_parseval(theta, c, T, tilt.alpha, tilt.beta, cfg.s * T**tilt.nu, cfg.rtol, cfg.atol, cfg.limit).c_factor
    return oracle_tail(theta, c, T, cfg).b_factor
