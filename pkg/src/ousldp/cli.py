"""Command-line front end: ``ousldp <command> [flags]``.

Every command emits a single JSON object (or CSV rows) carrying a version
stamp and the config that produced it.  Exit status is 0 on success, 1 when
the computation itself refuses (domain, regime, solver or quadrature
errors) and 2 on invalid flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from . import __version__
from .cgf import cgf_exact, decompose
from .errors import OusldpError
from .inversion import oracle_tail
from .model import classify_case, effective_domain, finite_T_domain, rate_function
from .saddle import solve_saddle
from .simulate import plain_mc_tail, tilted_mc_tail
from .sldp import VARIANTS, max_order, tail_probability

COMMANDS = ("rate", "domain", "cgf", "saddle", "tail", "invert", "simulate", "validate", "table")
METHODS = ("plain", "tilted")
TABLE_METHODS = ("sldp", "oracle", "mc")
FORMATS = ("json", "csv")
TABLE_COLUMNS = (
    "theta", "c", "T", "method", "regime", "side", "rate",
    "probability", "log_probability", "error_estimate", "reason",
)


class UsageError(Exception):
    def __init__(self, flag: str, message: str) -> None:
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    command: str
    theta: float = 1.0
    c: float = 0.5
    T: float = 10.0
    a: float | None = None
    order: int = 0
    variant: str = "corrected"
    n_paths: int = 100_000
    n_steps: int | None = None
    seed: int = 0
    method: str = "tilted"
    proposal: str = "exact-tilt"
    format: str = "json"
    output: str = "-"
    thetas: list[float] = field(default_factory=list)
    cs: list[float] = field(default_factory=list)
    Ts: list[float] = field(default_factory=list)
    methods: list[str] = field(default_factory=lambda: ["sldp", "oracle"])

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError("command", f"must be one of {COMMANDS}")
        for name in ("theta", "c", "T"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise UsageError(f"--{name}", f"must be a finite number, got {v!r}")
        if self.T <= 0:
            raise UsageError("--T", f"must be positive, got {self.T}")
        if self.a is not None and not math.isfinite(self.a):
            raise UsageError("--a", f"must be finite, got {self.a}")
        if self.order < 0:
            raise UsageError("--order", f"must be nonnegative, got {self.order}")
        if self.n_paths < 1:
            raise UsageError("--n-paths", f"must be positive, got {self.n_paths}")
        if self.n_steps is not None and self.n_steps < 1:
            raise UsageError("--n-steps", f"must be positive, got {self.n_steps}")
        if self.seed < 0:
            raise UsageError("--seed", f"must be nonnegative, got {self.seed}")
        if self.variant not in VARIANTS:
            raise UsageError("--variant", f"must be one of {VARIANTS}")
        if self.method not in METHODS:
            raise UsageError("--method", f"must be one of {METHODS}")
        if self.format not in FORMATS:
            raise UsageError("--format", f"must be one of {FORMATS}")
        for m in self.methods:
            if m not in TABLE_METHODS:
                raise UsageError("--methods", f"entries must be in {TABLE_METHODS}, got {m!r}")
        for flag, grid in (("--thetas", self.thetas), ("--cs", self.cs), ("--Ts", self.Ts)):
            if not all(math.isfinite(v) for v in grid):
                raise UsageError(flag, "entries must be finite")
        if any(t <= 0 for t in self.Ts):
            raise UsageError("--Ts", "entries must be positive")


# serialisation -----------------------------------------------------------------


def _plain(obj: Any) -> Any:
    """Convert dataclasses, enums and numpy scalars to JSON-ready builtins."""
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)) and not hasattr(obj, "value"):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = "%.17g" % x
    return text if any(ch in text for ch in ".en") else text + ".0"


def to_json(obj: Any) -> str:
    """JSON with every float printed to 17 significant digits."""
    obj = _plain(obj)

    def enc(v):
        if isinstance(v, bool) or v is None:
            return json.dumps(v)
        if isinstance(v, float):
            return _fmt_float(v)
        if isinstance(v, int):
            return str(v)
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, dict):
            return "{" + ", ".join(f"{json.dumps(k)}: {enc(x)}" for k, x in v.items()) + "}"
        if isinstance(v, list):
            return "[" + ", ".join(enc(x) for x in v) + "]"
        return json.dumps(str(v))

    return enc(obj)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    rows = [_flatten(_plain(r)) for r in rows]
    if columns is None:
        columns = []
        for r in rows:
            columns += [k for k in r if k not in columns]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        cells = []
        for col in columns:
            v = r.get(col)
            cells.append("" if v is None else _fmt_float(v) if isinstance(v, float) else
                         json.dumps(v) if isinstance(v, list) else str(v))
        w.writerow(cells)
    return buf.getvalue()


# dispatch ----------------------------------------------------------------------


def _regime_fields(theta: float, c: float) -> dict:
    case = classify_case(theta, c)
    return {"regime": case.value, "side": case.side.value}


def _cmd_rate(cfg: RunConfig) -> dict:
    return {**_regime_fields(cfg.theta, cfg.c), "rate": rate_function(cfg.theta, cfg.c)}


def _cmd_domain(cfg: RunConfig) -> dict:
    lim = effective_domain(cfg.theta, cfg.c)
    fin = finite_T_domain(cfg.theta, cfg.c, cfg.T)
    return {**_regime_fields(cfg.theta, cfg.c), "limit_domain": [lim.lower, lim.upper],
            "finite_T_domain": [fin.lower, fin.upper]}


def _cmd_cgf(cfg: RunConfig) -> dict:
    a = effective_domain(cfg.theta, cfg.c).midpoint if cfg.a is None else cfg.a
    d = decompose(cfg.theta, cfg.c, a, cfg.T)
    return {"a": a, "cgf_exact": cgf_exact(cfg.theta, cfg.c, a, cfg.T), "decomposition": d}


def _cmd_saddle(cfg: RunConfig) -> dict:
    s = solve_saddle(cfg.theta, cfg.c, cfg.T)
    return {"regime": s.regime.value, "a_T": s.a_T, "phi": s.phi_at, "residual": s.residual,
            "iterations": s.iterations, "series_a": s.series.a_at(cfg.T) if s.series else None}


def _tail_report(t) -> dict:
    return {"regime": t.regime.value, "side": t.side.value, "rate": t.rate, "order": t.order,
            "variant": t.variant, "prefactor_log": t.prefactor_log, "corrections": list(t.corrections),
            "probability": t.probability, "raw": t.raw, "log_probability": t.log_probability, "exact": t.exact}


def _cmd_tail(cfg: RunConfig) -> dict:
    return _tail_report(tail_probability(cfg.theta, cfg.c, cfg.T, cfg.order, cfg.variant))


def _oracle_report(r) -> dict:
    return {"regime": r.regime.value, "side": r.side.value, "probability": r.probability,
            "log_probability": r.log_probability, "a_T": r.a_t_used, "beta": r.beta_used,
            "a_factor": r.a_factor, "b_factor": r.b_factor, "d_bound": r.d_bound,
            "quadrature_error": r.quadrature_error, "s_T": r.s_T}


def _cmd_invert(cfg: RunConfig) -> dict:
    return _oracle_report(oracle_tail(cfg.theta, cfg.c, cfg.T))


def _mc(cfg: RunConfig):
    if cfg.method == "plain":
        return plain_mc_tail(cfg.theta, cfg.c, cfg.T, cfg.n_paths, cfg.n_steps, cfg.seed)
    return tilted_mc_tail(cfg.theta, cfg.c, cfg.T, cfg.a, cfg.n_paths, cfg.n_steps, cfg.seed, proposal=cfg.proposal)


def _mc_report(m) -> dict:
    return {"method": m.method.value, "side": m.side.value, "estimate": m.estimate, "std_error": m.std_error,
            "n_paths": m.n_paths, "n_steps": m.n_steps, "tilt_a": m.tilt_a, "proposal_drift": m.proposal_drift,
            "raw": m.raw, **{k: v for k, v in m.extras.items()}}


def _cmd_simulate(cfg: RunConfig) -> dict:
    return {**_regime_fields(cfg.theta, cfg.c), **_mc_report(_mc(cfg))}


def _sldp_best(cfg: RunConfig):
    top = max_order(cfg.theta, cfg.c)
    order = cfg.order if top is None else min(max(cfg.order, 1), top)
    return tail_probability(cfg.theta, cfg.c, cfg.T, order, cfg.variant)


def _rel(x: float, y: float) -> float:
    return abs(x - y) / abs(y) if y else math.inf


def _cmd_validate(cfg: RunConfig) -> dict:
    s = _sldp_best(cfg)
    o = oracle_tail(cfg.theta, cfg.c, cfg.T)
    m = _mc(RunConfig(**{**asdict(cfg), "method": "tilted"}))
    return {
        **_regime_fields(cfg.theta, cfg.c),
        "sldp": _tail_report(s),
        "oracle": _oracle_report(o),
        "mc": _mc_report(m),
        "gaps": {
            "sldp_vs_oracle_rel": _rel(s.raw, o.probability),
            "mc_vs_oracle_se": abs(m.raw - o.probability) / m.std_error if m.std_error else math.inf,
            "sldp_vs_mc_rel": _rel(s.raw, m.raw),
        },
    }


def _table_row(cfg: RunConfig, theta: float, c: float, T: float, method: str) -> dict:
    row = dict.fromkeys(TABLE_COLUMNS)
    row.update(theta=theta, c=c, T=T, method=method)
    try:
        case = classify_case(theta, c)
        row.update(regime=case.value, side=case.side.value, rate=rate_function(theta, c))
        sub = RunConfig(**{**asdict(cfg), "theta": theta, "c": c, "T": T})
        if method == "sldp":
            t = _sldp_best(sub)
            row.update(probability=t.probability, log_probability=t.log_probability, error_estimate=None)
        elif method == "oracle":
            r = oracle_tail(theta, c, T)
            row.update(probability=r.probability, log_probability=r.log_probability,
                       error_estimate=r.quadrature_error)
        else:
            m = _mc(RunConfig(**{**asdict(sub), "method": "tilted"}))
            row.update(probability=m.estimate, log_probability=math.log(m.estimate) if m.estimate > 0 else -math.inf,
                       error_estimate=m.std_error)
        row["reason"] = "ok"
    except OusldpError as exc:
        row["reason"] = exc.reason
    return row


def _cmd_table(cfg: RunConfig) -> dict:
    thetas = cfg.thetas or [cfg.theta]
    cs = cfg.cs or [cfg.c]
    Ts = cfg.Ts or [cfg.T]
    rows = [_table_row(cfg, th, c, T, m) for th in thetas for c in cs for T in Ts for m in cfg.methods]
    return {"rows": rows}


_DISPATCH = {
    "rate": _cmd_rate,
    "domain": _cmd_domain,
    "cgf": _cmd_cgf,
    "saddle": _cmd_saddle,
    "tail": _cmd_tail,
    "invert": _cmd_invert,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
    "table": _cmd_table,
}


def _stamp(cfg: RunConfig) -> dict:
    return {"package": "ousldp", "version": __version__, "config": asdict(cfg)}


def run_command(cfg: RunConfig) -> tuple[int, dict]:
    """Dispatch a config; returns (exit status, report)."""
    try:
        cfg.validate()
    except UsageError as exc:
        return 2, {"error": str(exc), "reason": "usage", "flag": exc.flag, **_stamp(cfg)}
    try:
        body = _DISPATCH[cfg.command](cfg)
    except OusldpError as exc:
        return 1, {"command": cfg.command, "error": str(exc), "reason": exc.reason, **_stamp(cfg)}
    return 0, {"command": cfg.command, **body, **_stamp(cfg)}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report) + "\n"
    if "rows" in report:
        return to_csv(report["rows"], list(TABLE_COLUMNS))
    flat = {k: v for k, v in report.items() if k != "config"}
    return to_csv([flat])


# argument parsing --------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ousldp", description="Tail probabilities of the OU drift MLE.")
    p.add_argument("--version", action="version", version=f"ousldp {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--a", type=float, default=None, help="tilt (cgf, simulate); defaults per regime")
    p.add_argument("--order", type=int, default=0)
    p.add_argument("--variant", choices=VARIANTS, default="corrected")
    p.add_argument("--n-paths", dest="n_paths", type=int, default=100_000)
    p.add_argument("--n-steps", dest="n_steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=METHODS, default="tilted")
    p.add_argument("--proposal", choices=("exact-tilt", "ou-drift"), default="exact-tilt")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--output", default="-")
    p.add_argument("--thetas", type=_float_list, default=[])
    p.add_argument("--cs", type=_float_list, default=[])
    p.add_argument("--Ts", type=_float_list, default=[])
    p.add_argument("--methods", type=lambda s: [m.strip() for m in s.split(",") if m.strip()],
                   default=["sldp", "oracle"])
    return p


_LIST_FLAGS = ("--thetas", "--cs", "--Ts")


def _join_negative_lists(argv: list[str]) -> list[str]:
    # argparse reads "-1,2" as an option; bind it to its list flag explicitly
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok in _LIST_FLAGS and nxt[:1] == "-" and nxt[1:2] in set("0123456789."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def parse_config(argv: list[str] | None = None) -> RunConfig:
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_join_negative_lists(argv))
    return RunConfig(**vars(ns))


def main(argv: list[str] | None = None) -> int:
    cfg = parse_config(argv)  # argparse exits with status 2 on malformed flags
    status, report = run_command(cfg)
    text = render(report, cfg.format)
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    if status:
        print(f"ousldp: {report['reason']}: {report['error']}", file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
