"""Independent reference tail probabilities by Gil-Pelaez inversion.

Uses E exp(aZ) = D(a)^(-1/2) with
D(a) = exp((a + theta) T) [cosh(sT) - (a + theta) sinh(sT)/s], s^2 = theta^2 + 2ac,
which is entire in a (no square-root branch for s).  Along a = iu the phase
of D is unwrapped on a dense grid, and

    P(Z >= 0) = 1/2 + (1/pi) int_0^inf Im E[exp(iuZ)] / u du

is integrated with the composite Simpson rule.  Nothing here touches the
tilted Parseval route, so agreement with it is a genuine cross-check.

Run: python scripts/freeze_reference_values.py  (prints a JSON table)
"""

from __future__ import annotations

import json
import math
import sys

import numpy as np
from scipy.integrate import simpson


def log_d(theta: float, c: float, T: float, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log D split into a part that is continuous in a and the principal log of the bracket."""
    s = np.sqrt(theta * theta + 2.0 * a * c + 0j)
    s = np.where(s.real < 0, -s, s)  # either root gives the same D; keep Re s >= 0
    e = np.exp(-2.0 * s * T)
    small = np.abs(s) < 1e-8
    ratio = np.where(small, T * (1 + 0j), (1.0 - e) / np.where(small, 1.0, 2.0 * s))
    direct = 0.5 * (1.0 + e) - (a + theta) * ratio
    # for explosive drifts the bracket is ~exp(-2 theta T) at small u; the direct form
    # cancels O(1) terms there, so use s - (a + theta) = a (2c - a - 2 theta)/(s + a + theta)
    plus = s + a + theta
    safe = np.where(np.abs(plus) > 0, plus, 1.0)
    stable = (a * (2.0 * c - a - 2.0 * theta) / safe + e * plus) / np.where(small, 1.0, 2.0 * s)
    use = (np.abs(plus) > np.abs(s - a - theta)) & ~small
    inner = np.where(use, stable, direct)
    return (a + theta) * T + s * T, np.log(inner)


def upper_tail(theta: float, c: float, T: float, u_max: float, n: int = 2_000_001) -> float:
    # a geometric grid resolves both the small-u region and the long tail;
    # Z has scale Var(X_T), which is huge for explosive drifts
    var_end = T if theta == 0 else math.expm1(2.0 * theta * T) / (2.0 * theta)
    u_min = 1e-6 / max(1.0, var_end, T)
    u = np.concatenate([[0.0], np.geomspace(u_min, u_max, n - 1)])
    # only the principal log of the bracket wraps; the smooth part can move by more than pi per step
    for _ in range(60):
        smooth, bracket = log_d(theta, c, T, 1j * u)
        jump = np.abs(np.diff(np.unwrap(bracket.imag)))
        bad = np.nonzero(jump > 0.3)[0]
        if bad.size == 0:
            break
        u = np.sort(np.concatenate([u, 0.5 * (u[bad] + u[bad + 1])]))
    else:
        raise RuntimeError("phase of D not resolved after refinement")
    ld = smooth + bracket.real + 1j * np.unwrap(bracket.imag)
    logcf = -0.5 * ld
    cf = np.exp(logcf)
    g = np.empty_like(u)
    g[1:] = cf[1:].imag / u[1:]
    g[0] = g[1]
    tail = abs(cf[-1])
    if tail > 1e-14:
        raise RuntimeError(f"characteristic function not decayed at u_max={u_max}: {tail:.2e}")
    return 0.5 + simpson(g, x=u) / math.pi


CASES = [
    (1.0, 0.5, 5.0, "lower"),
    (1.0, -1.0, 5.0, "lower"),
    (1.0, -2.0, 3.0, "lower"),
    (-1.0, -2.0, 10.0, "lower"),
    (-1.0, -0.9, 10.0, "upper"),
    (-1.0, -1.0 / 3.0, 10.0, "upper"),
    (0.0, -1.0, 5.0, "lower"),
    (1.0, 0.5, 10.0, "lower"),
]


def main() -> int:
    out = []
    for theta, c, T, side in CASES:
        up = upper_tail(theta, c, T, u_max=1e6)
        up2 = upper_tail(theta, c, T, u_max=1e6, n=4_000_001)
        p = up if side == "upper" else 1.0 - up
        p2 = up2 if side == "upper" else 1.0 - up2
        out.append({"theta": theta, "c": c, "T": T, "side": side, "probability": p, "refine_gap": abs(p - p2)})
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
