"""Command-line front end.

    gronwall-lab construct --M 1 --n-max 8 --out y.csv
    gronwall-lab verify    --trajectory oscillator --grid-density 512
    gronwall-lab report    --M 1 --out run.csv
    gronwall-lab envelope  --T-star 1.0 --L 20,50,100 --k 2,3,5
    gronwall-lab extremal  --tau-max 12

CSV files open with ``#``-prefixed lines holding the run manifest as JSON.
Exit codes: 0 pass, 1 certification failure, 2 invalid config, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .envelope import (
    RHO_DEFAULT,
    log_envelope_first_gap,
    log_envelope_higher_gap,
    optimal_p,
)
from .extremal import (
    blowup_ratio,
    closed_form_gridfunction,
    closed_form_logX,
    integrate_transformed,
)
from .function_core import GridFunction, continuity_audit, segment_aligned_grid
from .oscillator import ConstructionError, OscillatorConfig, build_oscillator
from .quadrature import QuadratureError
from .reparam import blowup_time, pushforward_from_tau
from .verifier import oscillation_certificate, residual_transformed, with_bump

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("construct", "verify", "report", "envelope", "extremal")
AUDIT_TOL = 1e-10


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    M: float = 1.0
    n_max: int = 8
    grid_density: int = 512
    tau_max: float | None = None
    k: list[int] = field(default_factory=lambda: [2, 3, 5])
    L: list[float] = field(default_factory=lambda: [20.0, 50.0, 100.0, 200.0])
    rho: float = float(RHO_DEFAULT)
    C: float = 1.0
    T_star: float | None = None
    steps: int = 24000
    slack: float | None = None
    trajectory: str = "oscillator"
    out: str | None = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not (math.isfinite(self.M) and self.M > 0):
            raise ConfigError(f"--M must be a positive number, got {self.M}")
        if self.n_max < 1:
            raise ConfigError(f"--n-max must be >= 1, got {self.n_max}")
        if self.grid_density < 1:
            raise ConfigError(f"--grid-density must be >= 1, got {self.grid_density}")
        if self.tau_max is not None and not (0 < self.tau_max <= 15):
            raise ConfigError(f"--tau-max must lie in (0, 15], got {self.tau_max}")
        if any(k < 2 for k in self.k):
            raise ConfigError(f"--k values must be >= 2, got {self.k}")
        if any(not (L > 0) for L in self.L):
            raise ConfigError(f"--L values must be positive, got {self.L}")
        if not self.C > 0:
            raise ConfigError(f"--C must be positive, got {self.C}")
        if self.T_star is not None and not self.T_star > 0:
            raise ConfigError(f"--T-star must be positive, got {self.T_star}")
        if self.steps < 100:
            raise ConfigError(f"--steps must be >= 100, got {self.steps}")
        if self.slack is not None and self.slack < 0:
            raise ConfigError(f"--slack must be >= 0, got {self.slack}")
        if self.trajectory not in ("oscillator", "extremal", "defect"):
            raise ConfigError(f"--trajectory must be oscillator, extremal or defect, got {self.trajectory!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"--format must be csv or json, got {self.format!r}")
        return self


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


_CONVERTERS = {
    "M": float, "n_max": int, "grid_density": int, "tau_max": float, "k": _int_list,
    "L": _float_list, "rho": float, "C": float, "T_star": float, "steps": int,
    "slack": float, "trajectory": str, "out": str, "format": str,
}
_ALIASES = {"m": "M", "c": "C", "l": "L", "t_star": "T_star"}


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        key = key if key in _CONVERTERS else _ALIASES.get(key.lower(), key)
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gronwall-lab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        # None means "not given" so config-file values can fill in
        p.add_argument("--M", dest="M")
        p.add_argument("--n-max", dest="n_max")
        p.add_argument("--grid-density", dest="grid_density")
        p.add_argument("--tau-max", dest="tau_max")
        p.add_argument("--k", dest="k")
        p.add_argument("--L", dest="L")
        p.add_argument("--rho", dest="rho")
        p.add_argument("--C", dest="C")
        p.add_argument("--T-star", dest="T_star")
        p.add_argument("--steps", dest="steps")
        p.add_argument("--slack", dest="slack")
        p.add_argument("--trajectory", dest="trajectory")
        p.add_argument("--out", dest="out")
        p.add_argument("--format", dest="format")
        p.add_argument("--config", dest="config")
    return parser


def resolve_config(argv: list[str] | None) -> RunConfig:
    """Flags override the config file, which overrides defaults."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError("invalid command line") from exc
    raw = read_config_file(ns.config) if ns.config else {}
    for key in _CONVERTERS:
        value = getattr(ns, key)
        if value is not None:
            raw[key] = value
    kwargs = {}
    for key, value in raw.items():
        try:
            kwargs[key] = _CONVERTERS[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return RunConfig(command=ns.command, **kwargs).validate()


# ---------------------------------------------------------------- output


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def csv_text(manifest: dict, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_jsonable(manifest), sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _write(path: str | None, text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def emit_table(cfg: RunConfig, manifest: dict, columns: list[str], rows: list[list], stdout,
               suffix: str = "") -> None:
    out = cfg.out
    if out is not None and suffix:
        p = Path(out)
        out = str(p.with_name(f"{p.stem}.{suffix}{p.suffix or ('.' + cfg.format)}"))
    if cfg.format == "csv":
        _write(out, csv_text(manifest, columns, rows), stdout)
    else:
        table = [dict(zip(columns, r)) for r in rows]
        _write(out, json_text({"manifest": manifest, "columns": columns, "rows": table}), stdout)


def _manifest(cfg: RunConfig, **extra) -> dict:
    base = {"command": cfg.command, "version": __version__}
    base.update(extra)
    return base


# ---------------------------------------------------------------- commands


def cmd_construct(cfg: RunConfig, stdout=sys.stdout) -> int:
    X = build_oscillator(OscillatorConfig(cfg.M, cfg.n_max))
    audit = continuity_audit(X, AUDIT_TOL)
    rows = []
    for i, tau in enumerate(X.knots):
        if i < len(X.segments):
            seg = X.segments[i]
            spline = getattr(seg, "spline", None)
            kind = "spline" if spline is not None else "branch"
            a, b = (spline.a, spline.b) if spline is not None else (None, None)
        else:
            kind, a, b = "end", None, None
        rows.append([i, tau, kind, X(tau), X.derivative(tau), a, b])
    manifest = _manifest(
        cfg, M=cfg.M, N_max=cfg.n_max, n_segments=len(X.segments), domain_end=X.domain_end,
        X0=X(0.0),
        continuity_audit={"tol": AUDIT_TOL, "n_violations": len(audit),
                          "violations": [asdict(g) for g in audit]},
    )
    columns = ["knot_index", "tau", "kind", "value", "slope", "a", "b"]
    emit_table(cfg, manifest, columns, rows, stdout)
    if cfg.format == "csv" and cfg.out is not None:
        p = Path(cfg.out)
        _write(str(p.with_name(p.stem + ".manifest.json")), json_text(manifest), stdout)
    if audit:
        stdout.write(json_text({"error": "continuity audit failed", **manifest["continuity_audit"]}))
        return EXIT_FAIL
    return EXIT_OK


def _verify_target(cfg: RunConfig):
    if cfg.trajectory == "extremal":
        tau_max = 2.0 if cfg.tau_max is None else cfg.tau_max
        n = max(2, int(math.ceil(tau_max * cfg.grid_density)))
        taus = np.linspace(0.0, tau_max, n + 1)
        slack = 1e-6 if cfg.slack is None else cfg.slack
        return closed_form_gridfunction(cfg.M, taus), slack
    X = build_oscillator(OscillatorConfig(cfg.M, cfg.n_max))
    end = X.domain_end if cfg.tau_max is None else min(cfg.tau_max, X.domain_end)
    taus = segment_aligned_grid(X, cfg.grid_density, end=end)
    g = GridFunction(taus, X.values(taus), derivatives=X.derivatives(taus))
    slack = 0.0 if cfg.slack is None else cfg.slack
    if cfg.trajectory == "defect":
        # steep bump: slope ~ amplitude / width breaks the inequality near tau = 0.3
        g = with_bump(g, center=0.3, amplitude=cfg.M, width=0.01)
    return g, slack


def cmd_verify(cfg: RunConfig, stdout=sys.stdout) -> int:
    g, slack = _verify_target(cfg)
    rep = residual_transformed(g, slack=slack)
    verdict = _manifest(cfg, trajectory=cfg.trajectory, M=cfg.M, grid_density=cfg.grid_density,
                        **rep.summary())
    if cfg.trajectory != "extremal":
        verdict["N_max"] = cfg.n_max
    rows = [[t, x, dx, r, res] for t, x, dx, r, res in
            zip(rep.grid, rep.values, rep.derivatives, rep.rhs, rep.residuals)]
    columns = ["tau", "X", "Xprime", "rhs", "residual"]
    emit_table(cfg, verdict, columns, rows, stdout)
    if cfg.out is not None:
        p = Path(cfg.out)
        _write(str(p.with_name(p.stem + ".verdict.json")), json_text(verdict), stdout)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _extremal_rows(cfg: RunConfig, tau_max: float) -> tuple[list[str], list[list], dict]:
    n_rows = 24
    steps = n_rows * math.ceil(cfg.steps / n_rows)
    traj = integrate_transformed(cfg.M, tau_max, steps)
    stride = steps // n_rows
    rows = []
    max_dev_3 = 0.0
    for i in range(0, steps + 1, stride):
        tau = float(traj.taus[i])
        cf = closed_form_logX(cfg.M, tau)
        dev = abs(traj.logX[i] - cf)
        if tau <= 3.0:
            max_dev_3 = max(max_dev_3, dev)
        rows.append([tau, cf, traj.logX[i], dev, blowup_ratio(cfg.M, tau) if tau > 0 else None])
    columns = ["tau", "logX", "logX_rk4", "abs_log_deviation", "ratio"]
    info = {"steps": steps, "max_log_deviation_tau_le_3": max_dev_3,
            "ratio_at_tau_max": blowup_ratio(cfg.M, tau_max)}
    return columns, rows, info


def _envelope_rows(cfg: RunConfig, T_star: float) -> tuple[list[str], list[list]]:
    columns = ["L", "log_gap", "t", "log_envelope_first"]
    columns += [f"log_envelope_k{k}" for k in cfg.k]
    columns += ["envelope_first"] + [f"envelope_k{k}" for k in cfg.k] + ["optimal_p"]
    rows = []
    for L in cfg.L:
        log_gap = -L
        lf = log_envelope_first_gap(log_gap, cfg.C, cfg.rho)
        lh = [log_envelope_higher_gap(log_gap, k, cfg.C) for k in cfg.k]
        vals = [math.exp(v) if v < 709.0 else math.inf for v in [lf] + lh]
        rows.append([L, log_gap, T_star - math.exp(log_gap), lf, *lh, *vals, optimal_p(L)])
    return columns, rows


def cmd_report(cfg: RunConfig, stdout=sys.stdout) -> int:
    X = build_oscillator(OscillatorConfig(cfg.M, cfg.n_max))
    r = blowup_time(X)
    taus = segment_aligned_grid(X, cfg.grid_density)
    pushed = pushforward_from_tau(X, taus)
    head = _manifest(cfg, M=cfg.M, N_max=cfg.n_max, T_star=r.T_star,
                     T_star_error_bound=r.T_star_error_bound, T_star_times_M=r.T_star * cfg.M,
                     tail_bound=r.tail_bound, horizon=r.horizon)
    push_rows = [[tau, t, x] for tau, t, x in zip(pushed.accumulation, pushed.abscissae, pushed.values)]

    tau_max = 12.0 if cfg.tau_max is None else cfg.tau_max
    ecols, erows, einfo = _extremal_rows(cfg, tau_max)
    T_env = r.T_star if cfg.T_star is None else cfg.T_star
    vcols, vrows = _envelope_rows(cfg, T_env)

    if cfg.format == "json":
        payload = {
            "manifest": head,
            "pushforward": {"columns": ["tau", "t", "x"], "rows": push_rows},
            "extremal": {"manifest": einfo, "columns": ecols, "rows": erows},
            "envelope": {"manifest": {"T_star": T_env, "C": cfg.C, "rho": cfg.rho, "k": cfg.k},
                         "columns": vcols, "rows": vrows},
        }
        _write(cfg.out, json_text(payload), stdout)
        return EXIT_OK
    emit_table(cfg, head, ["tau", "t", "x"], push_rows, stdout, suffix="pushforward")
    emit_table(cfg, {**head, **einfo, "tau_max": tau_max}, ecols, erows, stdout, suffix="extremal")
    emit_table(cfg, {**head, "T_star_envelope": T_env, "C": cfg.C, "rho": cfg.rho, "k": cfg.k},
               vcols, vrows, stdout, suffix="envelope")
    return EXIT_OK


def cmd_envelope(cfg: RunConfig, stdout=sys.stdout) -> int:
    T_star = 1.0 if cfg.T_star is None else cfg.T_star
    cols, rows = _envelope_rows(cfg, T_star)
    emit_table(cfg, _manifest(cfg, T_star=T_star, C=cfg.C, rho=cfg.rho, k=cfg.k), cols, rows, stdout)
    return EXIT_OK


def cmd_extremal(cfg: RunConfig, stdout=sys.stdout) -> int:
    tau_max = 12.0 if cfg.tau_max is None else cfg.tau_max
    cols, rows, info = _extremal_rows(cfg, tau_max)
    emit_table(cfg, _manifest(cfg, M=cfg.M, tau_max=tau_max, **info), cols, rows, stdout)
    return EXIT_OK


_DISPATCH = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "report": cmd_report,
    "envelope": cmd_envelope,
    "extremal": cmd_extremal,
}


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        cfg = resolve_config(argv)
    except ConfigError as exc:
        stdout.write(json_text({"error": "invalid config", "detail": str(exc)}))
        return EXIT_CONFIG
    try:
        return _DISPATCH[cfg.command](cfg, stdout=stdout)
    except (ConstructionError, QuadratureError, ArithmeticError, OverflowError) as exc:
        detail = {"error": "numeric failure", "type": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, QuadratureError):
            detail["diagnostics"] = exc.diagnostics()
        stdout.write(json_text(detail))
        return EXIT_NUMERIC
    except ValueError as exc:
        stdout.write(json_text({"error": "invalid config", "detail": str(exc)}))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
