"""Command-line entry point: one computation per invocation.

Every run writes one output file (CSV or JSON) plus ``<out>.meta.json`` with
the tool version, the echoed configuration and the wall time.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bifurcation import (DEFAULT_P_GRID_N, DEFAULT_SWEEP_N, sweep_eps, sweep_r, surface,
                          tangency_curve, _open_grid)
from .curves import CurveFamilySpec, make_curve, validate
from .dynamics import ModelParams, integrate
from .equilibria import DEFAULT_GRID_N, DEFAULT_TOL, find_all
from .errors import NumericalError, VaxAdaptError
from . import serialize as ser

COMMANDS = ("validate", "equilibria", "trajectory", "sweep-r", "sweep-eps", "tangency", "surface")


@dataclass
class RunConfig:
    command: str
    curve: CurveFamilySpec
    r: float | None = None
    eps: float | None = None
    out_path: str | None = None
    format: str = "csv"
    grid_n: int = DEFAULT_GRID_N
    tol: float = DEFAULT_TOL
    validate_grid_n: int = 1024
    P0: float = 0.5
    t_end: float = 50.0
    dt: float = 1e-3
    sweep_n: int = DEFAULT_SWEEP_N
    sweep_min: float | None = None
    sweep_max: float | None = None
    p_grid_n: int = DEFAULT_P_GRID_N
    eps_n: int = 101
    branch: str = "solver"
    events_path: str | None = None
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def resolved_out(self) -> str:
        return self.out_path or f"{self.command}.{self.format}"


class ConfigError(VaxAdaptError, ValueError):
    pass


def _need(value, name):
    if value is None:
        raise ConfigError(f"--{name} is required for this command")
    return value


def check_config(cfg: RunConfig) -> None:
    """Raise ConfigError (or ParameterError) for anything invalid, before any computation."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"--format must be csv or json, got {cfg.format!r}")
    if cfg.branch not in ("solver", "closed-form"):
        raise ConfigError(f"--branch must be solver or closed-form, got {cfg.branch!r}")
    if cfg.command in ("equilibria", "trajectory"):
        ModelParams(_need(cfg.r, "r"), _need(cfg.eps, "eps"))
        if cfg.command == "equilibria" and not cfg.r > 0:
            raise ConfigError("--r must be > 0 for equilibria")
    if cfg.command == "sweep-r":
        ModelParams(0.5, _need(cfg.eps, "eps"))
    if cfg.command == "sweep-eps":
        r = _need(cfg.r, "r")
        if not 0 < r < 1:
            raise ConfigError(f"--r must lie in (0, 1), got {r!r}")
    if cfg.command == "trajectory":
        if not 0 <= cfg.P0 <= 1:
            raise ConfigError(f"--P0 must lie in [0, 1], got {cfg.P0!r}")
        if not (cfg.t_end > 0 and cfg.dt > 0):
            raise ConfigError("--t-end and --dt must be positive")
    if cfg.command in ("sweep-r", "sweep-eps"):
        lo, hi = _sweep_bounds(cfg)
        if not (0 <= lo < hi <= 1):
            raise ConfigError(f"sweep range must satisfy 0 <= min < max <= 1, got [{lo}, {hi}]")
        if cfg.sweep_n < 2:
            raise ConfigError("--n must be at least 2")
    if cfg.grid_n < 64:
        raise ConfigError("--grid-n must be at least 64")
    if cfg.validate_grid_n < 16:
        raise ConfigError("--grid-n must be at least 16 for validate")
    if not cfg.tol > 0:
        raise ConfigError("--tol must be positive")
    if cfg.p_grid_n < 2 or cfg.eps_n < 2:
        raise ConfigError("grid sizes must be at least 2")
    if cfg.threads < 1:
        raise ConfigError("--threads must be at least 1")
    for path in filter(None, (cfg.resolved_out(), cfg.events_path)):
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
            raise ConfigError(f"output path {path!r} is not writable")
        if os.path.isdir(path):
            raise ConfigError(f"output path {path!r} is a directory")


def _sweep_bounds(cfg: RunConfig) -> tuple[float, float]:
    lo = 0.0 if cfg.sweep_min is None else cfg.sweep_min
    hi = 1.0 if cfg.sweep_max is None else cfg.sweep_max
    return lo, hi


def _sweep_grid(cfg: RunConfig, open_ends: bool) -> np.ndarray:
    lo, hi = _sweep_bounds(cfg)
    if open_ends:
        # r = 0 and r = 1 are excluded from solver sweeps
        return np.linspace(lo, hi, cfg.sweep_n + 2)[1:-1]
    return np.linspace(lo, hi, cfg.sweep_n)


def _compute(cfg: RunConfig, curve):
    """Return (csv_writer, json_document, summary) for the configured command."""
    if cfg.command == "validate":
        rep = validate(curve, cfg.validate_grid_n)
        return (lambda fh: ser.write_validation_csv(rep, fh), ser.validation_to_dict(rep),
                {"passed": rep.passed, "failures": rep.failures()})
    if cfg.command == "equilibria":
        eqs = find_all(curve, ModelParams(cfg.r, cfg.eps), cfg.grid_n, cfg.tol)
        return (lambda fh: ser.write_equilibria_csv(eqs, fh), ser.equilibria_to_dict(eqs),
                {"count": len(eqs), "roots": eqs.roots})
    if cfg.command == "trajectory":
        tr = integrate(curve, ModelParams(cfg.r, cfg.eps), cfg.P0, cfg.t_end, cfg.dt)
        return (lambda fh: ser.write_trajectory_csv(tr, fh), ser.trajectory_to_dict(tr),
                {"final": tr.final, "max_clamp": tr.max_clamp})
    if cfg.command in ("sweep-r", "sweep-eps"):
        if cfg.command == "sweep-r":
            d = sweep_r(curve, cfg.eps, _sweep_grid(cfg, True), cfg.p_grid_n, cfg.grid_n, cfg.tol, cfg.threads)
        else:
            d = sweep_eps(curve, cfg.r, _sweep_grid(cfg, False), cfg.p_grid_n, cfg.grid_n, cfg.tol, cfg.threads)
        if cfg.events_path:
            with open(cfg.events_path, "w", newline="") as fh:
                ser.write_events_csv(d, fh)
        source = "solver" if cfg.branch == "solver" else "closed_form"
        return (lambda fh: ser.write_diagram_csv(d, fh, source), ser.diagram_to_dict(d),
                {"events": [{"param": e.param, "P": e.P} for e in d.events]})
    if cfg.command == "tangency":
        tc = tangency_curve(curve, _open_grid(curve.p_star, cfg.p_grid_n))
        return (lambda fh: ser.write_tangency_csv(tc, fh), ser.tangency_to_dict(tc),
                {"points": len(tc), "feasible": len(tc.feasible()), "skipped": tc.skipped})
    samples = surface(curve, _open_grid(curve.p_star, cfg.p_grid_n), np.linspace(0.0, 1.0, cfg.eps_n))
    return (lambda fh: ser.write_surface_csv(samples, fh), ser.surface_to_dict(samples),
            {"samples": int(len(samples))})


def _config_echo(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["curve"] = ser.curve_spec_to_dict(cfg.curve)
    d["out_path"] = cfg.resolved_out()
    return d


def run(cfg: RunConfig, stderr=None) -> int:
    """Execute one command; returns the process exit code."""
    stderr = stderr or sys.stderr
    try:
        check_config(cfg)
        curve = make_curve(cfg.curve)
    except (VaxAdaptError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    start = time.perf_counter()
    try:
        write_csv, doc, summary = _compute(cfg, curve)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 2
    except (VaxAdaptError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    wall = time.perf_counter() - start

    out = cfg.resolved_out()
    try:
        with open(out, "w", newline="") as fh:
            if cfg.format == "csv":
                write_csv(fh)
            else:
                json.dump(doc, fh, indent=1)
                fh.write("\n")
        meta = {
            "tool": "vaxadapt",
            "version": __version__,
            "config": _config_echo(cfg),
            "wall_time_s": wall,
            "summary": summary,
        }
        with open(out + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=1, default=float)
            fh.write("\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vaxadapt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("curve")
    g.add_argument("--curve", default="example1",
                   help="family: example1, example2, convex-test, rational-glue")
    g.add_argument("--curve-spec", help="curve spec as JSON text or @path to a JSON file")
    g.add_argument("--R0", type=float)
    g.add_argument("--transition-lo", type=float)
    g.add_argument("--transition-hi", type=float)
    g.add_argument("--p-star", type=float)
    g.add_argument("--exponent", type=int)
    g.add_argument("--raw", action="store_true", help="do not normalise the rational families to pi(0)=1")
    o = common.add_argument_group("output")
    o.add_argument("--out", dest="out_path")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    def add(name, help):
        return sub.add_parser(name, parents=[common], help=help)

    p = add("validate", "check the standing assumptions on pi")
    p.add_argument("--grid-n", dest="validate_grid_n", type=int, default=1024)

    for name, help in (("equilibria", "all equilibria at fixed (r, eps)"),
                       ("trajectory", "RK4 trajectory of P(t)")):
        p = add(name, help)
        p.add_argument("--r", type=float, required=True)
        p.add_argument("--eps", type=float, required=True)
        if name == "equilibria":
            p.add_argument("--grid-n", type=int, default=DEFAULT_GRID_N)
            p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        else:
            p.add_argument("--P0", type=float, default=0.5)
            p.add_argument("--t-end", type=float, default=50.0)
            p.add_argument("--dt", type=float, default=1e-3)

    for name, fixed in (("sweep-r", "eps"), ("sweep-eps", "r")):
        p = add(name, f"bifurcation diagram at fixed {fixed}")
        p.add_argument(f"--{fixed}", type=float, required=True)
        p.add_argument("--min", dest="sweep_min", type=float)
        p.add_argument("--max", dest="sweep_max", type=float)
        p.add_argument("--n", dest="sweep_n", type=int, default=DEFAULT_SWEEP_N)
        p.add_argument("--p-grid-n", type=int, default=DEFAULT_P_GRID_N)
        p.add_argument("--grid-n", type=int, default=DEFAULT_GRID_N)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--branch", choices=("solver", "closed-form"), default="solver")
        p.add_argument("--events-out", dest="events_path")

    p = add("tangency", "closed-form saddle-node curve (eps(P), r(P))")
    p.add_argument("--p-grid-n", type=int, default=DEFAULT_P_GRID_N)
    p = add("surface", "equilibrium surface samples (P, eps, r)")
    p.add_argument("--p-grid-n", type=int, default=200)
    p.add_argument("--eps-n", type=int, default=101)
    return parser


def _curve_from_args(ns) -> CurveFamilySpec:
    if ns.curve_spec:
        text = ns.curve_spec
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        return ser.parse_curve_spec(text)
    doc = {"family": ns.curve}
    for key, attr in (("R0", "R0"), ("transition_lo", "transition_lo"), ("transition_hi", "transition_hi"),
                      ("p_star", "p_star"), ("exponent", "exponent")):
        if getattr(ns, attr) is not None:
            doc[key] = getattr(ns, attr)
    if ns.raw:
        doc["normalize"] = False
    return ser.parse_curve_spec(doc)


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    known = {f for f in RunConfig.__dataclass_fields__} - {"command", "curve"}
    kwargs = {k: v for k, v in vars(ns).items() if k in known and v is not None}
    return RunConfig(command=ns.command, curve=_curve_from_args(ns), **kwargs)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except (VaxAdaptError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
