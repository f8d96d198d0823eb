"""Normalised cumulant generating function of Z_T(c).

L_T(a) = (1/T) log E[exp(a Z_T(c))] has the closed form

    L_T(a) = -tau/2 - (1/2T) log(1 + tau/(2 phi) (1 - exp(2 phi T)))

with phi = -sqrt(theta^2 + 2ac) and tau = a + theta - phi.  It splits as
L(a) + H(a)/T + R_T(a)/T where L = -tau/2, H = -log((1+h)/2)/2 with
h = (a + theta)/phi, and R_T is exponentially small in T.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BoundaryError, DomainError
from .model import effective_domain

#: Tilts closer than this to the edge of the limiting domain are rejected.
BOUNDARY_GUARD = 1e-10


class CgfParts(NamedTuple):
    phi: float
    tau: float
    h_ratio: float


class CgfDerivatives(NamedTuple):
    dL: float
    d2L: float
    dH: float


class HigherDerivatives(NamedTuple):
    """Derivatives of L up to order four and of H up to order two."""

    L1: float
    L2: float
    L3: float
    L4: float
    H1: float
    H2: float


@dataclass(frozen=True)
class CgfDecomposition:
    phi: float
    tau: float
    h_ratio: float
    big_l: float
    big_h: float
    remainder: float
    assembled: float


@dataclass(frozen=True)
class ComplexCgfPoint:
    z: complex
    value: complex
    branch_ok: bool


def _q(theta: float, c: float, a: float) -> float:
    q = theta * theta + 2.0 * a * c
    if not q > 0:
        raise DomainError(f"theta^2 + 2ac > 0 violated (value {q!r}) at a={a}")
    return q


def cgf_parts(theta: float, c: float, a: float) -> CgfParts:
    """Return (phi, tau, h) at the real tilt ``a``."""
    phi = -math.sqrt(_q(theta, c, a))
    return CgfParts(phi, a + theta - phi, (a + theta) / phi)


def check_limit_domain(theta: float, c: float, a: float) -> None:
    """Raise unless ``a`` is strictly inside the limiting tilt domain, away from its edges."""
    q = _q(theta, c, a)
    if not a + theta < math.sqrt(q):
        raise DomainError(f"a + theta < sqrt(theta^2 + 2ac) violated at a={a}")
    dom = effective_domain(theta, c)
    if dom.distance_to_edge(a) < BOUNDARY_GUARD:
        raise BoundaryError(f"a={a} is within {BOUNDARY_GUARD} of the domain edge ({dom.lower}, {dom.upper})")


def big_l(theta: float, c: float, a: float) -> float:
    """Limit L(a) = -(a + theta + sqrt(theta^2 + 2ac))/2."""
    return -0.5 * (a + theta + math.sqrt(_q(theta, c, a)))


def big_h(theta: float, c: float, a: float) -> float:
    """First-order term H(a) = -log((1 + h(a))/2)/2 (finite only on the limiting domain)."""
    phi, _, h = cgf_parts(theta, c, a)
    if not 1.0 + h > 0:
        raise DomainError(f"1 + h(a) > 0 violated at a={a}")
    return -0.5 * math.log(0.5 * (1.0 + h))


def decompose(theta: float, c: float, a: float, T: float) -> CgfDecomposition:
    """Split L_T(a) into L(a), H(a)/T and the exponentially small R_T(a)/T."""
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    check_limit_domain(theta, c, a)
    phi, tau, h = cgf_parts(theta, c, a)
    L = -0.5 * tau
    H = -0.5 * math.log(0.5 * (1.0 + h))
    r = (1.0 - h) / (1.0 + h)
    R = -0.5 * math.log1p(r * math.exp(2.0 * phi * T))
    return CgfDecomposition(phi, tau, h, L, H, R, L + (H + R) / T)


def cgf_exact(theta: float, c: float, a: float, T: float) -> float:
    """Closed-form L_T(a); raises if the log argument is not positive."""
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    phi, tau, _ = cgf_parts(theta, c, a)
    arg = tau / (2.0 * phi) * -math.expm1(2.0 * phi * T)
    if not 1.0 + arg > 0:
        raise DomainError(f"a={a} lies outside the finite-horizon domain (log argument {1.0 + arg!r})")
    return -0.5 * tau - math.log1p(arg) / (2.0 * T)


def log_mgf(theta: float, c: float, a: float, T: float) -> float:
    """log E[exp(a Z_T(c))] = T L_T(a)."""
    return T * cgf_exact(theta, c, a, T)


def _h_phi_derivs(theta: float, c: float, phi: float) -> tuple[float, float]:
    # H as a function of phi: -log((phi+theta)(phi+2c-theta)/(4 c phi))/2
    u, v = phi + theta, phi + 2.0 * c - theta
    if u == 0 or v == 0:
        return math.nan, math.nan
    d1 = -0.5 * (1.0 / u + 1.0 / v - 1.0 / phi)
    d2 = 0.5 * (1.0 / u**2 + 1.0 / v**2 - 1.0 / phi**2)
    return d1, d2


def higher_derivatives(theta: float, c: float, a: float) -> HigherDerivatives:
    """Closed-form L', L'', L''', L'''' and H', H'' at ``a``."""
    q = _q(theta, c, a)
    s = math.sqrt(q)
    phi = -s
    L1 = -0.5 * (1.0 + c / s)
    L2 = 0.5 * c**2 * q**-1.5
    L3 = -1.5 * c**3 * q**-2.5
    L4 = 7.5 * c**4 * q**-3.5
    dphi = c / phi
    d2phi = -(c**2) / phi**3
    g1, g2 = _h_phi_derivs(theta, c, phi)
    return HigherDerivatives(L1, L2, L3, L4, g1 * dphi, g2 * dphi**2 + g1 * d2phi)


def cgf_derivatives(theta: float, c: float, a: float) -> CgfDerivatives:
    """(L'(a), L''(a), H'(a)).

    L' and L'' only need theta^2 + 2ac > 0; H' is NaN unless ``a`` lies in
    the limiting domain, where H is finite.
    """
    d = higher_derivatives(theta, c, a)
    try:
        check_limit_domain(theta, c, a)
        dh = d.H1
    except DomainError:
        dh = math.nan
    return CgfDerivatives(d.L1, d.L2, dh)


# complex extension ---------------------------------------------------------


def _on_cut(w) -> bool:
    return w.imag == 0 and w.real <= 0


def complex_cgf(theta: float, c: float, z: complex, T: float) -> ComplexCgfPoint:
    """L_T(z) for complex z with principal branches of sqrt and log.

    ``branch_ok`` is False when either log argument lands on the cut
    (-inf, 0]; the value is still returned for diagnostics.
    """
    z = complex(z)
    check_limit_domain(theta, c, z.real)
    phi = -cmath.sqrt(theta * theta + 2.0 * z * c)
    h = (z + theta) / phi
    half = 0.5 * (1.0 + h)
    rem_arg = 1.0 + (1.0 - h) / (1.0 + h) * cmath.exp(2.0 * phi * T)
    ok = not (_on_cut(half) or _on_cut(rem_arg))
    value = -0.5 * (z + theta - phi) + (-0.5 * cmath.log(half) - 0.5 * cmath.log(rem_arg)) / T
    return ComplexCgfPoint(z, value, ok)


def log_char_fn(theta: float, c: float, T: float, alpha: float, beta: float, u) -> tuple[np.ndarray, np.ndarray]:
    """T (L_T(alpha + iu/beta) - L_T(alpha)) on an array of ``u``, plus branch flags.

    The increments of L and phi are formed without cancellation so that
    small u keeps full relative accuracy.
    """
    if beta == 0:
        raise DomainError("beta must be nonzero")
    check_limit_domain(theta, c, alpha)
    u = np.asarray(u, dtype=float)
    q = theta * theta + 2.0 * alpha * c
    phi_a = -math.sqrt(q)
    v = 1j * u / beta
    w = 2.0 * c * v / q
    dphi = phi_a * w / (np.sqrt(1.0 + w) + 1.0)
    phi_z = phi_a + dphi
    d_l = -0.5 * (v - dphi)

    h_a = (alpha + theta) / phi_a
    h_z = (alpha + v + theta) / phi_z
    ratio = (1.0 + h_z) / (1.0 + h_a)
    d_h = -0.5 * np.log(ratio)

    r_a = (1.0 - h_a) / (1.0 + h_a)
    r_z = (1.0 - h_z) / (1.0 + h_z)
    e_a = r_a * math.exp(2.0 * phi_a * T)
    e_z = r_z * np.exp(2.0 * phi_z * T)
    d_r = -0.5 * (np.log1p(e_z) - math.log1p(e_a))

    on_cut = lambda w: (w.imag == 0) & (w.real <= 0)  # noqa: E731
    ok = ~(on_cut(ratio) | on_cut(1.0 + e_z))
    return T * d_l + d_h + d_r, ok


def branch_continuous(theta: float, c: float, T: float, alpha: float, beta: float, u) -> bool:
    """True when the log arguments of H and R_T do not wind across the cut along ``u``.

    ``u`` must be an increasing grid starting at 0, fine enough that the
    arguments move by less than pi between neighbours.
    """
    check_limit_domain(theta, c, alpha)
    u = np.asarray(u, dtype=float)
    z = alpha + 1j * u / beta
    phi = -np.sqrt(theta * theta + 2.0 * c * z)
    h = (z + theta) / phi
    e = (1.0 - h) / (1.0 + h) * np.exp(2.0 * phi * T)
    for w in (1.0 + h, 1.0 + e):
        ang = np.angle(w)
        if np.any(np.abs(np.unwrap(ang) - ang) > 1e-9):
            return False
    return True


def char_fn(theta: float, c: float, T: float, alpha: float, beta: float, u):
    """Characteristic function of U_T = Z_T/beta under the tilt ``alpha``."""
    lv, _ = log_char_fn(theta, c, T, alpha, beta, u)
    out = np.exp(lv)
    return complex(out) if out.ndim == 0 else out


def bound_constant(theta: float, c: float, a: float) -> float:
    """Constant max(1, |phi+theta|/|phi|) * max(1, |phi+2c-theta|/|phi|) >= 1."""
    phi = -math.sqrt(_q(theta, c, a))
    return max(1.0, abs(phi + theta) / abs(phi)) * max(1.0, abs(phi + 2.0 * c - theta) / abs(phi))


def char_bound(theta: float, c: float, a: float, u, T: float):
    """Upper bound on |exp(T (L_T(a + iu) - L_T(a)))|^2."""
    phi = -math.sqrt(_q(theta, c, a))
    ell = bound_constant(theta, c, a)
    u = np.asarray(u, dtype=float)
    g = 1.0 + 4.0 * c * c * u * u / phi**4
    out = 4.0 * ell * g**0.25 * np.exp(T * c * c * u * u / (2.0 * phi**3) * g**-0.75)
    return float(out) if out.ndim == 0 else out
