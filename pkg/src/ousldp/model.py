"""OU model, threshold regimes, rate functions and tilt domains.

The process is dX = theta X dt + dB with X_0 = 0, observed on [0, T].
For a threshold c, the statistic Z_T(c) = (X_T^2 - T)/2 - c * int X^2
satisfies {theta_hat >= c} = {Z_T(c) >= 0}; everything downstream is
organised by the regime of the pair (theta, c).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError

#: Absolute tolerance used to snap c onto the special thresholds.
SNAP_TOL = 1e-12


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ModelSpec:
    """OU drift and observation horizon."""

    theta: float
    horizon: float

    def __post_init__(self) -> None:
        _check_finite(theta=self.theta, horizon=self.horizon)
        if self.horizon <= 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")

    @property
    def kind(self) -> str:
        if self.theta < 0:
            return "stable"
        if self.theta > 0:
            return "explosive"
        return "unstable"


class Side(str, enum.Enum):
    """Which tail of the estimator is described."""

    UPPER = "UpperTail"  # P(theta_hat >= c) = P(Z >= 0)
    LOWER = "LowerTail"  # P(theta_hat <= c) = P(Z <= 0)


class RegimeCase(str, enum.Enum):
    """Branch of the tail asymptotics that applies to (theta, c)."""

    STABLE_LEFT = "StableLeft"
    STABLE_INNER = "StableInner"
    STABLE_RIGHT = "StableRight"
    STABLE_CRITICAL = "StableCritical"
    STABLE_ZERO = "StableZero"
    STABLE_AT_THETA = "StableAtTheta"
    EXPLOSIVE_LEFT = "ExplosiveLeft"
    EXPLOSIVE_RIGHT = "ExplosiveRight"
    EXPLOSIVE_VALLEY = "ExplosiveValley"
    EXPLOSIVE_CRITICAL = "ExplosiveCritical"
    EXPLOSIVE_ZERO = "ExplosiveZero"
    EXPLOSIVE_AT_THETA = "ExplosiveAtTheta"
    UNSTABLE_LEFT = "UnstableLeft"
    UNSTABLE_RIGHT = "UnstableRight"
    UNSTABLE_ZERO = "UnstableZero"

    @property
    def side(self) -> Side:
        return _SIDES[self]

    @property
    def is_zero_threshold(self) -> bool:
        return self in (RegimeCase.STABLE_ZERO, RegimeCase.EXPLOSIVE_ZERO, RegimeCase.UNSTABLE_ZERO)

    @property
    def at_theta(self) -> bool:
        return self in (RegimeCase.STABLE_AT_THETA, RegimeCase.EXPLOSIVE_AT_THETA)

    @property
    def fixed_tilt(self) -> bool:
        """True when the optimal tilt is the interior minimiser a_c (no saddle drift)."""
        return self in (
            RegimeCase.STABLE_LEFT,
            RegimeCase.STABLE_INNER,
            RegimeCase.EXPLOSIVE_LEFT,
            RegimeCase.UNSTABLE_LEFT,
        )

    @property
    def right_border(self) -> bool:
        """True when the tilt converges to the border a = 2(c - theta)."""
        return self in (RegimeCase.STABLE_RIGHT, RegimeCase.EXPLOSIVE_RIGHT, RegimeCase.UNSTABLE_RIGHT)


_SIDES = {
    RegimeCase.STABLE_LEFT: Side.LOWER,
    RegimeCase.STABLE_INNER: Side.UPPER,
    RegimeCase.STABLE_RIGHT: Side.UPPER,
    RegimeCase.STABLE_CRITICAL: Side.UPPER,
    RegimeCase.STABLE_ZERO: Side.UPPER,
    RegimeCase.STABLE_AT_THETA: Side.UPPER,
    RegimeCase.EXPLOSIVE_LEFT: Side.LOWER,
    RegimeCase.EXPLOSIVE_RIGHT: Side.UPPER,
    RegimeCase.EXPLOSIVE_VALLEY: Side.LOWER,
    RegimeCase.EXPLOSIVE_CRITICAL: Side.LOWER,
    RegimeCase.EXPLOSIVE_ZERO: Side.LOWER,
    RegimeCase.EXPLOSIVE_AT_THETA: Side.UPPER,
    RegimeCase.UNSTABLE_LEFT: Side.LOWER,
    RegimeCase.UNSTABLE_RIGHT: Side.UPPER,
    RegimeCase.UNSTABLE_ZERO: Side.LOWER,
}


def _near(x: float, y: float) -> bool:
    return abs(x - y) <= SNAP_TOL


def classify_case(theta: float, c: float) -> RegimeCase:
    """Return the regime of the threshold ``c`` for drift ``theta``.

    Equalities (c = theta, c = -theta, c = theta/3, c = 0, theta = 0) are
    detected with absolute tolerance ``SNAP_TOL``.
    """
    _check_finite(theta=theta, c=c)
    if _near(theta, 0.0):
        if _near(c, 0.0):
            return RegimeCase.UNSTABLE_ZERO
        return RegimeCase.UNSTABLE_LEFT if c < 0 else RegimeCase.UNSTABLE_RIGHT
    if theta > 0:
        if _near(c, 0.0):
            return RegimeCase.EXPLOSIVE_ZERO
        if _near(c, theta):
            return RegimeCase.EXPLOSIVE_AT_THETA
        if _near(c, -theta):
            return RegimeCase.EXPLOSIVE_CRITICAL
        if c < -theta:
            return RegimeCase.EXPLOSIVE_LEFT
        if c > theta:
            return RegimeCase.EXPLOSIVE_RIGHT
        return RegimeCase.EXPLOSIVE_VALLEY
    if _near(c, 0.0):
        return RegimeCase.STABLE_ZERO
    if _near(c, theta):
        return RegimeCase.STABLE_AT_THETA
    if _near(c, theta / 3.0):
        return RegimeCase.STABLE_CRITICAL
    if c < theta:
        return RegimeCase.STABLE_LEFT
    if c < theta / 3.0:
        return RegimeCase.STABLE_INNER
    return RegimeCase.STABLE_RIGHT


def rate_function(theta: float, c: float) -> float:
    """Large-deviation rate I(c) of the drift MLE.

    Explosive drifts give a flat valley I = theta on |c| < theta with a
    jump down to 0 at c = theta.
    """
    _check_finite(theta=theta, c=c)
    if _near(c, theta):
        return 0.0
    if _near(theta, 0.0):
        return -c / 4.0 if c <= 0 else 2.0 * c
    if theta > 0:
        if c <= -theta:
            return -((c - theta) ** 2) / (4.0 * c)
        if c < theta:
            return theta
        return 2.0 * c - theta
    if c < theta / 3.0:
        return -((c - theta) ** 2) / (4.0 * c)
    return 2.0 * c - theta


@dataclass(frozen=True)
class EffectiveDomain:
    """Open interval (lower, upper); ``lower`` may be -inf, ``upper`` may be +inf."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise DomainError(f"empty interval ({self.lower}, {self.upper})")

    def __contains__(self, a: float) -> bool:
        return self.lower < a < self.upper

    def distance_to_edge(self, a: float) -> float:
        return min(a - self.lower, self.upper - a)

    @property
    def midpoint(self) -> float:
        lo, hi = self.lower, self.upper
        if math.isinf(lo) and math.isinf(hi):
            return 0.0
        if math.isinf(lo):
            return hi - max(1.0, abs(hi))
        if math.isinf(hi):
            return lo + max(1.0, abs(lo))
        return 0.5 * (lo + hi)


def in_limit_domain(theta: float, c: float, a: float) -> bool:
    """Direct test of theta^2 + 2ac > 0 and a + theta < sqrt(theta^2 + 2ac)."""
    q = theta * theta + 2.0 * a * c
    return q > 0 and a + theta < math.sqrt(q)


def _require_nonzero_c(c: float) -> None:
    if _near(c, 0.0):
        raise DomainError("c = 0: the tilt domain degenerates; use the exact Gaussian route")


def effective_domain(theta: float, c: float) -> EffectiveDomain:
    """Interval of tilts a where the limiting normalised CGF is finite.

    Candidate endpoints are 0, 2(c - theta), -theta^2/(2c) and -theta (where
    the sign of a + theta flips); the membership test is evaluated between
    consecutive candidates.
    """
    _check_finite(theta=theta, c=c)
    _require_nonzero_c(c)
    cuts = sorted({0.0, 2.0 * (c - theta), -theta * theta / (2.0 * c), -theta})
    points = [-math.inf, *cuts, math.inf]
    inside = []
    for lo, hi in zip(points[:-1], points[1:]):
        if math.isinf(lo):
            probe = hi - 1.0
        elif math.isinf(hi):
            probe = lo + 1.0
        else:
            probe = 0.5 * (lo + hi)
        inside.append(in_limit_domain(theta, c, probe))
    runs = []
    for k, flag in enumerate(inside):
        if not flag:
            continue
        if runs and runs[-1][1] == k - 1:
            runs[-1][1] = k
        else:
            runs.append([k, k])
    if len(runs) != 1:
        raise DomainError(f"tilt domain for theta={theta}, c={c} is not a single interval")
    k0, k1 = runs[0]
    return EffectiveDomain(points[k0], points[k1 + 1])


def _finite_T_gap(theta: float, c: float, T: float, a: float) -> float:
    """s coth(sT) - (a + theta) with s = sqrt(theta^2 + 2ac); positive inside."""
    s = math.sqrt(theta * theta + 2.0 * a * c)
    x = s * T
    scoth = s / math.tanh(x) if x > 1e-8 else 1.0 / T + s * x / 3.0
    return scoth - (a + theta)


def finite_T_domain(theta: float, c: float, T: float, tol: float = 1e-12) -> EffectiveDomain:
    """Inner finite-horizon tilt set {a : q > 0, a + theta < s coth(sT)}.

    Starts from the limiting interval and pushes each endpoint outward by
    bisection on the boundary equation. Endpoints where q = theta^2 + 2ac
    vanishes are kept.
    """
    _check_finite(theta=theta, c=c, T=T)
    _require_nonzero_c(c)
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    base = effective_domain(theta, c)
    q_edge = -theta * theta / (2.0 * c)

    def extend(edge: float, direction: float) -> float:
        if math.isinf(edge) or edge == q_edge:
            return edge
        # the q = 0 edge, if it lies in this direction, caps the search
        cap = q_edge if (q_edge - edge) * direction > 0 else None
        inner = edge
        step = 1e-3 * max(1.0, abs(edge))
        while True:
            trial = edge + direction * step
            if cap is not None and (trial - cap) * direction >= 0:
                probe = cap - direction * 1e-12 * max(1.0, abs(cap))
                if _finite_T_gap(theta, c, T, probe) > 0:
                    return cap
                outer = probe
                break
            if _finite_T_gap(theta, c, T, trial) <= 0:
                outer = trial
                break
            inner = trial
            step *= 2.0
            if step > 1e15:
                return direction * math.inf
        while abs(outer - inner) > tol * max(1.0, abs(inner)):
            mid = 0.5 * (inner + outer)
            if mid in (inner, outer):
                break
            if _finite_T_gap(theta, c, T, mid) > 0:
                inner = mid
            else:
                outer = mid
        return inner

    return EffectiveDomain(extend(base.lower, -1.0), extend(base.upper, 1.0))
