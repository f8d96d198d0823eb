"""Exact-transition OU simulation, the drift MLE and Monte Carlo tail estimates.

Grid values are sampled from the exact Gaussian transition, so the only
discretisation is the trapezoid rule for int_0^T X_t^2 dt.  Random numbers
come from Philox streams spawned per chunk of paths from the root seed, so
estimates do not depend on the thread count; chunk results are combined in
chunk order.

Two importance samplers are available for tail probabilities:

* ``"exact-tilt"`` (default) samples the exponentially tilted law
  Q = exp(a Z - T L_T(a)) . P exactly: under Q the path is an OU(phi(a))
  path whose endpoint law is reweighted by exp(tau X_T^2 / 2), i.e. an OU
  bridge to X_T ~ N(0, v/(1 - tau v)).  The weight exp(-a Z + T L_T(a)) is
  bounded on the event, so the estimator has finite variance.
* ``"ou-drift"`` samples plain OU(phi(a)) paths and applies the Girsanov
  weight exp(-(phi-theta)(X_T^2-T)/2 + (phi^2-theta^2)/2 int X^2).
"""

from __future__ import annotations

import csv
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
from scipy import signal, stats
from scipy.integrate import trapezoid

from .cgf import log_mgf
from .errors import DomainError
from .model import Side, classify_case, finite_T_domain

#: Paths per RNG stream; fixed so results do not depend on the thread count.
CHUNK_PATHS = 2048
THREADS_ENV = "OUSLDP_THREADS"
PROPOSALS = ("exact-tilt", "ou-drift")


class McMethod(str, enum.Enum):
    PLAIN = "Plain"
    TILTED = "Tilted"


@dataclass(frozen=True)
class Path:
    times: np.ndarray
    values: np.ndarray
    theta_used: float

    def __post_init__(self) -> None:
        t, x = np.asarray(self.times), np.asarray(self.values)
        if t.ndim != 1 or t.shape != x.shape or t.size < 2:
            raise DomainError("times and values must be 1-d arrays of equal length >= 2")
        if t[0] != 0.0 or not np.all(np.diff(t) > 0):
            raise DomainError("time grid must start at 0 and be strictly increasing")
        if x[0] != 0.0:
            raise DomainError("paths start at X_0 = 0")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    n_paths: int
    method: McMethod
    side: Side
    tilt_a: float | None = None
    proposal_drift: float | None = None
    raw: float | None = None
    n_steps: int | None = None
    extras: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class LimitLawReport:
    kind: str
    theta: float
    T: float
    n_paths: int
    n_steps: int
    statistic: str
    ks_distance: float
    ks_pvalue: float
    quartiles: tuple[float, float]
    reference_quartiles: tuple[float, float]
    summary: dict = field(default_factory=dict)


def default_n_steps(T: float) -> int:
    return max(1000, int(math.ceil(200.0 * T)))


def transition_variance(theta: float, dt: float) -> float:
    """Var(X_dt | X_0 = 0) = (exp(2 theta dt) - 1)/(2 theta), or dt when theta = 0."""
    if theta == 0.0:
        return dt
    return math.expm1(2.0 * theta * dt) / (2.0 * theta)


def _validate(T: float, n_steps: int, n_paths: int | None = None) -> None:
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"T must be positive and finite, got {T}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise DomainError(f"n_steps must be a positive integer, got {n_steps}")
    if n_paths is not None and (int(n_paths) != n_paths or n_paths < 1):
        raise DomainError(f"n_paths must be a positive integer, got {n_paths}")


def _ou_steps(theta: float, dt: float, z: np.ndarray) -> np.ndarray:
    """Exact OU values X_dt, ..., X_{n dt} from standard normals z of shape (m, n); z is overwritten."""
    e = math.exp(theta * dt)
    z *= math.sqrt(transition_variance(theta, dt))
    return signal.lfilter([1.0], [1.0, -e], z, axis=1)


def _ou_grid(theta: float, dt: float, z: np.ndarray) -> np.ndarray:
    """As _ou_steps with the initial column X_0 = 0 prepended."""
    x = _ou_steps(theta, dt, z)
    return np.concatenate([np.zeros((x.shape[0], 1)), x], axis=1)


def _trap_weights(n_steps: int, dt: float) -> np.ndarray:
    w = np.full(n_steps + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def _rng(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_seq))


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _map_chunks(fn, n_paths: int, seed: int, threads: int | None = None) -> list:
    """Run fn(rng, m) over chunks of at most CHUNK_PATHS paths; results in chunk order."""
    sizes = [CHUNK_PATHS] * (n_paths // CHUNK_PATHS)
    if n_paths % CHUNK_PATHS:
        sizes.append(n_paths % CHUNK_PATHS)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(seqs, sizes))
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(jobs) == 1:
        return [fn(_rng(s), m) for s, m in jobs]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda job: fn(_rng(job[0]), job[1]), jobs))


class _Moments:
    """Chunk-wise mean/variance accumulator (pairwise combination)."""

    def __init__(self) -> None:
        self.n, self.mean, self.m2 = 0, 0.0, 0.0

    def add(self, y: np.ndarray) -> None:
        n_b = y.size
        if n_b == 0:
            return
        mean_b = float(np.mean(y))
        m2_b = float(np.sum((y - mean_b) ** 2))
        n = self.n + n_b
        delta = mean_b - self.mean
        self.mean += delta * n_b / n
        self.m2 += m2_b + delta * delta * self.n * n_b / n
        self.n = n

    @property
    def std_error(self) -> float:
        if self.n < 2:
            return math.nan
        return math.sqrt(self.m2 / (self.n - 1) / self.n)


# single paths ----------------------------------------------------------------


def simulate_path(theta: float, T: float, n_steps: int, seed: int) -> Path:
    """One OU path on the uniform grid k T / n_steps, sampled from the exact transition law."""
    _validate(T, n_steps)
    rng = _rng(np.random.SeedSequence(seed))
    dt = T / n_steps
    x = _ou_grid(theta, dt, rng.standard_normal((1, n_steps)))[0]
    return Path(np.linspace(0.0, T, n_steps + 1), x, float(theta))


def simulate_grid(theta: float, T: float, n_steps: int, n_paths: int, seed: int) -> np.ndarray:
    """Array (n_paths, n_steps + 1) of exact-transition OU paths on the uniform grid, column 0 = X_0 = 0."""
    _validate(T, n_steps, n_paths)
    dt = T / n_steps
    return np.concatenate(_map_chunks(lambda rng, m: _ou_grid(theta, dt, rng.standard_normal((m, n_steps))),
                                      n_paths, seed, threads=1))


def refine_path(path: Path, seed: int) -> Path:
    """Insert interval midpoints drawn from the exact OU bridge (same driver, finer grid)."""
    t, x, th = path.times, path.values, path.theta_used
    h = 0.5 * np.diff(t)
    e = np.exp(th * h)
    v = np.array([transition_variance(th, float(s)) for s in h])
    k = e / (1.0 + e * e)
    mean = e * x[:-1] + k * (x[1:] - e * e * x[:-1])
    sd = np.sqrt(v / (1.0 + e * e))
    mid = mean + sd * _rng(np.random.SeedSequence(seed)).standard_normal(h.size)
    times = np.empty(2 * t.size - 1)
    values = np.empty_like(times)
    times[0::2], times[1::2] = t, t[:-1] + h
    values[0::2], values[1::2] = x, mid
    return Path(times, values, th)


def integral_sq(path: Path) -> float:
    """Trapezoid approximation of int_0^T X_t^2 dt."""
    return float(trapezoid(path.values**2, path.times))


def mle_estimate(path: Path) -> float:
    """(X_T^2 - T) / (2 int X^2): exact Ito numerator, trapezoid denominator."""
    den = integral_sq(path)
    if not den > 0:
        raise DomainError("int X^2 dt vanished; the MLE is undefined on this path")
    return (path.values[-1] ** 2 - path.horizon) / (2.0 * den)


def z_statistic(path: Path, c: float) -> float:
    """Z_T(c) = (X_T^2 - T)/2 - c int X^2."""
    return 0.5 * (path.values[-1] ** 2 - path.horizon) - c * integral_sq(path)


def write_path_csv(path: Path, target, seed: int | None = None) -> None:
    """Dump one path as CSV with a commented parameter header and columns time,value."""
    own = isinstance(target, (str, os.PathLike))
    fh = open(FsPath(target), "w", newline="") if own else target
    try:
        fh.write(f"# theta={path.theta_used!r} T={path.horizon!r} seed={seed!r}\n")
        w = csv.writer(fh)
        w.writerow(["time", "value"])
        for t, v in zip(path.times, path.values):
            w.writerow([repr(float(t)), repr(float(v))])
    finally:
        if own:
            fh.close()


# Monte Carlo tails -------------------------------------------------------------


def _event(z: np.ndarray, side: Side) -> np.ndarray:
    return z >= 0 if side is Side.UPPER else z <= 0


def _resolve_side(theta: float, c: float, side: Side | str | None) -> Side:
    if side is None:
        return classify_case(theta, c).side
    return Side(side)


def plain_mc_tail(
    theta: float,
    c: float,
    T: float,
    n_paths: int,
    n_steps: int | None = None,
    seed: int = 0,
    side: Side | str | None = None,
    threads: int | None = None,
) -> McEstimate:
    """Fraction of exact-transition paths with Z_T(c) on the requested side of 0."""
    n_steps = default_n_steps(T) if n_steps is None else n_steps
    _validate(T, n_steps, n_paths)
    side = _resolve_side(theta, c, side)
    dt = T / n_steps
    w = _trap_weights(n_steps, dt)

    def chunk(rng, m):
        x = _ou_steps(theta, dt, rng.standard_normal((m, n_steps)))
        z = 0.5 * (x[:, -1] ** 2 - T) - c * np.einsum("ij,ij,j->i", x, x, w[1:])
        return int(np.count_nonzero(_event(z, side)))

    hits = sum(_map_chunks(chunk, n_paths, seed, threads))
    p = hits / n_paths
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n_paths), n_paths, McMethod.PLAIN, side, raw=p, n_steps=n_steps)


def default_tilt(theta: float, c: float, T: float) -> float:
    """Tilt used by the inversion oracle: a_c in fixed-tilt regimes, a_T elsewhere."""
    from .inversion import choose_tilt

    return choose_tilt(theta, c, T).alpha


def tilted_mc_tail(
    theta: float,
    c: float,
    T: float,
    a_tilt: float | None = None,
    n_paths: int = 100_000,
    n_steps: int | None = None,
    seed: int = 0,
    side: Side | str | None = None,
    proposal: str = "exact-tilt",
    threads: int | None = None,
) -> McEstimate:
    """Importance-sampled P(Z_T(c) >= 0) (upper side) or P(Z_T(c) <= 0) (lower side).

    Falls back to plain Monte Carlo when the tilt is degenerate: a = 0 for
    the exact tilt, |phi(a) - theta| < 1e-8 for the OU-drift proposal.
    """
    n_steps = default_n_steps(T) if n_steps is None else n_steps
    _validate(T, n_steps, n_paths)
    if proposal not in PROPOSALS:
        raise DomainError(f"proposal must be one of {PROPOSALS}, got {proposal!r}")
    side = _resolve_side(theta, c, side)
    a = default_tilt(theta, c, T) if a_tilt is None else float(a_tilt)
    dom = finite_T_domain(theta, c, T)
    if a not in dom:
        raise DomainError(f"a_tilt={a} outside the finite-horizon domain ({dom.lower}, {dom.upper})")
    phi = -math.sqrt(theta * theta + 2.0 * a * c)
    if (proposal == "exact-tilt" and a == 0.0) or (proposal == "ou-drift" and abs(phi - theta) < 1e-8):
        est = plain_mc_tail(theta, c, T, n_paths, n_steps, seed, side, threads)
        return McEstimate(est.estimate, est.std_error, n_paths, McMethod.PLAIN, side, a, theta, est.raw, n_steps,
                          {"fallback": "degenerate tilt"})

    dt = T / n_steps
    w = _trap_weights(n_steps, dt)
    t = np.linspace(0.0, T, n_steps + 1)

    if proposal == "exact-tilt":
        tau = a + theta - phi
        v_t = np.expm1(2.0 * phi * t) / (2.0 * phi)
        v_T = v_t[-1]
        end_var = v_T / (1.0 - tau * v_T)
        if not end_var > 0:
            raise DomainError(f"tilted endpoint variance is not positive at a={a}")
        gain = np.exp(phi * (T - t)) * v_t / v_T
        # X_0 = Y_0 = 0, so the first grid column drops out of every sum
        w1, wk, wkk = w[1:], (w * gain)[1:], float(np.sum(w * gain * gain))
        log_norm = log_mgf(theta, c, a, T)

        def log_weight_and_z(rng, m):
            y = _ou_steps(phi, dt, rng.standard_normal((m, n_steps)))
            x_T = math.sqrt(end_var) * rng.standard_normal(m)
            d = x_T - y[:, -1]
            sq = np.einsum("ij,ij,j->i", y, y, w1) + 2.0 * d * (y @ wk) + d * d * wkk
            z = 0.5 * (x_T**2 - T) - c * sq
            return -a * z + log_norm, z

    else:

        def log_weight_and_z(rng, m):
            x = _ou_steps(phi, dt, rng.standard_normal((m, n_steps)))
            sq = np.einsum("ij,ij,j->i", x, x, w[1:])
            num = 0.5 * (x[:, -1] ** 2 - T)
            lw = -(phi - theta) * num + 0.5 * (phi * phi - theta * theta) * sq
            return lw, num - c * sq

    def chunk(rng, m):
        lw, z = log_weight_and_z(rng, m)
        if np.any(np.isnan(lw)):
            raise DomainError("importance weight evaluated to NaN")
        wt = np.exp(lw)
        return np.where(_event(z, side), wt, 0.0), wt

    est, norm = _Moments(), _Moments()
    for y, wt in _map_chunks(chunk, n_paths, seed, threads):
        est.add(y)
        norm.add(wt)
    raw = est.mean
    extras = {"proposal": proposal, "mean_weight": norm.mean, "mean_weight_se": norm.std_error}
    return McEstimate(min(1.0, max(0.0, raw)), est.std_error, n_paths, McMethod.TILTED, side, a, phi, raw, n_steps,
                      extras)


# limit laws -------------------------------------------------------------------


def _mle_sample(theta: float, T: float, n_paths: int, n_steps: int, seed: int, threads: int | None) -> np.ndarray:
    dt = T / n_steps
    w = _trap_weights(n_steps, dt)

    def chunk(rng, m):
        x = _ou_steps(theta, dt, rng.standard_normal((m, n_steps)))
        return (x[:, -1] ** 2 - T) / (2.0 * np.einsum("ij,ij,j->i", x, x, w[1:]))

    return np.concatenate(_map_chunks(chunk, n_paths, seed, threads))


def limit_law_diagnostics(
    theta: float,
    T: float,
    n_paths: int = 10_000,
    n_steps: int | None = None,
    seed: int = 0,
    threads: int | None = None,
) -> LimitLawReport:
    """Compare the normalised MLE error with its limit law.

    stable: sqrt(T)(theta_hat - theta) vs N(0, -2 theta) by KS distance;
    explosive: exp(theta T)(theta_hat - theta)/(2 theta) vs standard Cauchy
    (quartiles +-1, plus KS); unstable: T theta_hat vs a simulated sample of
    (W_1^2 - 1)/(2 int_0^1 W^2) by two-sample KS.
    """
    n_steps = default_n_steps(T) if n_steps is None else n_steps
    _validate(T, n_steps, n_paths)
    est = _mle_sample(theta, T, n_paths, n_steps, seed, threads)
    if theta < 0:
        s = math.sqrt(T) * (est - theta)
        ref = stats.norm(scale=math.sqrt(-2.0 * theta))
        ks = stats.kstest(s, ref.cdf)
        kind, name, ref_q = "stable", "sqrt(T)(theta_hat - theta)", (float(ref.ppf(0.25)), float(ref.ppf(0.75)))
    elif theta > 0:
        s = math.exp(theta * T) * (est - theta) / (2.0 * theta)
        ks = stats.kstest(s, stats.cauchy.cdf)
        kind, name, ref_q = "explosive", "exp(theta T)(theta_hat - theta)/(2 theta)", (-1.0, 1.0)
    else:
        s = T * est
        ref_sample = _mle_sample(0.0, 1.0, n_paths, n_steps, seed + 1, threads)
        ks = stats.ks_2samp(s, ref_sample)
        kind, name = "unstable", "T theta_hat"
        ref_q = tuple(float(q) for q in np.quantile(ref_sample, [0.25, 0.75]))
    q = tuple(float(v) for v in np.quantile(s, [0.25, 0.75]))
    summary = {"median": float(np.median(s)), "mean": float(np.mean(s)), "std": float(np.std(s))}
    return LimitLawReport(kind, float(theta), float(T), n_paths, n_steps, name, float(ks.statistic), float(ks.pvalue),
                          q, ref_q, summary)
