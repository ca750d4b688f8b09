"""Command-line entry point: ``rampdiss <subcommand> [options]``.

Subcommands
-----------
evolve          correlator trajectories, one CSV per label (t, re, im, abs)
sweep           exponent table over a grid of ramp rates (nu, label, alpha_hat, alpha_pred, r2)
analytic-check  closed forms and saddle asymptote against the numerics
fit             power-law exponent of a trajectory CSV
presets         list the built-in initial states

Every run writes ``manifest.json`` next to its outputs with the config
digest, package versions and wall-clock runtimes.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 resonant ramp rate refused.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import fitting, workflows
from .config import RunConfig, load_config
from .exact import predict_alpha
from .errors import ConfigError, FitError, NumericalFailure, ResonantNuError
from .lindblad import CorrelatorLabel
from .presets import PRESETS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESONANT = 4

_TOL_KEYS = {"rel_tol": float, "abs_tol": float, "max_steps": int, "method": str}


def label_filename(label: str) -> str:
    """``c[z0 +1 -2]`` becomes ``z0_p1_m2.csv``."""
    lab = CorrelatorLabel.from_string(label)
    sym = {"z": "z", "plus": "p", "minus": "m"}
    return "_".join(f"{sym[i]}{s}" for s, i in lab.assignments) + ".csv"


def _apply_tol(run: RunConfig, overrides: list[str] | None) -> RunConfig:
    if not overrides:
        return run
    changes = {}
    for item in overrides:
        for part in item.split(","):
            key, sep, value = part.partition("=")
            key = key.strip()
            if not sep or key not in _TOL_KEYS:
                raise ConfigError(f"--tol expects key=value with key in {sorted(_TOL_KEYS)}, got {part!r}")
            try:
                changes[key] = _TOL_KEYS[key](value.strip())
            except ValueError as exc:
                raise ConfigError(f"--tol {key}: {exc}") from exc
    integration = replace(run.integration, **changes)
    if integration.rel_tol <= 0 or integration.abs_tol <= 0:
        raise ConfigError("--tol values must be positive")
    return replace(run, integration=integration)


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def _write_manifest(out: Path, command: str, run: RunConfig | None, files: list[str],
                    runtimes: dict, extra: dict | None = None) -> None:
    doc = {
        "command": command,
        "config": run.source if run else None,
        "config_sha256": run.digest() if run else None,
        "versions": _versions(),
        "runtimes_s": runtimes,
        "outputs": files,
    }
    if extra:
        doc.update(extra)
    (out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _prepare_out(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_evolve(args) -> int:
    run = _apply_tol(load_config(args.config), args.tol)
    out = _prepare_out(args.out)
    traj = workflows.simulate(run)
    files = []
    for label, values in traj.values.items():
        name = label_filename(label)
        fitting.write_trajectory_csv(out / name, traj.times, values)
        files.append(name)
    _write_manifest(out, "evolve", run, files, {"simulate": traj.runtime}, {"route": traj.route})
    print(f"wrote {len(files)} trajectories to {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    run = _apply_tol(load_config(args.config), args.tol)
    if run.sweep is None:
        raise ConfigError(f"{args.config}: a sweep needs a 'sweep' section")
    if run.sweep.route == "exact":
        bad = workflows.resonant_points(run.sweep.nu)
        if bad:
            raise ResonantNuError(f"closed-form route requested at resonant nu {bad}", bad[0])
    out = _prepare_out(args.out)
    start = time.perf_counter()
    rows = workflows.sweep(run, jobs=args.jobs)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nu", "label", "alpha_hat", "alpha_pred", "r2", "route", "window_lo", "window_hi", "method"])
        for r in rows:
            w.writerow([repr(r.nu), r.label, repr(r.alpha_hat), repr(r.alpha_pred), repr(r.r_squared),
                        r.route, repr(r.window[0]), repr(r.window[1]), r.method])
    _write_manifest(out, "sweep", run, ["sweep.csv"], {"sweep": time.perf_counter() - start})
    for r in rows:
        print(f"nu={r.nu:<6g} {r.label:<14} alpha_hat={r.alpha_hat:.4f} alpha_pred={r.alpha_pred:.4f} ({r.route})")
    return EXIT_OK


def cmd_analytic_check(args) -> int:
    run = _apply_tol(load_config(args.config), args.tol)
    out = _prepare_out(args.out)
    start = time.perf_counter()
    report = workflows.analytic_check(run)
    (out / "analytic_check.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_manifest(out, "analytic-check", run, ["analytic_check.json"],
                    {"analytic_check": time.perf_counter() - start})
    dev = report["max_rel_deviation"]
    print(f"max relative deviation, closed form vs numerics: {dev if dev is not None else 'n/a'}")
    for item in report["saddle"]:
        print(f"saddle n={item['n']} N+={item['n_plus']}: {'flat' if item['settled'] else 'drifting'}")
    if report["resonant"]:
        for r in report["resonant"]:
            print(f"resonant nu={run.ramp.nu}: sector {r['jz']} on sites {r['sites']} checked numerically only "
                  f"({r['reason']})", file=sys.stderr)
        return EXIT_RESONANT
    return EXIT_OK


def cmd_fit(args) -> int:
    t, v = fitting.read_trajectory_csv(args.csv)
    window = tuple(args.window) if args.window else None
    prediction = None
    if args.predict:
        n, n1, nu = args.predict
        if not (n.is_integer() and n1.is_integer() and 0 <= n1 <= n and n >= 1 and nu > 0):
            raise ConfigError("--predict expects integers N >= 1, 0 <= N1 <= N and a positive NU")
        prediction = predict_alpha(int(n), int(n1), nu)
    result = fitting.fit_exponent((t, v), window=window, method=args.method, prediction=prediction)
    text = result.to_json()
    if args.out:
        out = _prepare_out(args.out)
        (out / "fit.json").write_text(text + "\n")
        _write_manifest(out, "fit", None, ["fit.json"], {}, {"input": str(args.csv)})
    print(text)
    return EXIT_OK


def cmd_presets(args) -> int:
    for name, text in PRESETS.items():
        print(f"{name:<16} {text}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rampdiss", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML run document")
        p.add_argument("--out", default="out", help="output directory (created if missing)")
        p.add_argument("--tol", action="append", metavar="KEY=VALUE",
                       help="integration override, e.g. rel_tol=1e-8 (repeatable)")
        p.set_defaults(func=func)
        return p

    add_run("evolve", cmd_evolve, "write correlator trajectories")
    sw = add_run("sweep", cmd_sweep, "fit exponents over a grid of nu")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    add_run("analytic-check", cmd_analytic_check, "compare closed forms and asymptotes with numerics")

    fp = sub.add_parser("fit", help="fit a power law to a trajectory CSV")
    fp.add_argument("csv", help="CSV with columns t, re, im")
    fp.add_argument("--window", type=float, nargs=2, metavar=("T_LO", "T_HI"))
    fp.add_argument("--method", choices=("auto", "raw", "envelope"), default="auto")
    fp.add_argument("--predict", type=float, nargs=3, metavar=("N", "N1", "NU"),
                    help="attach the predicted exponent of an N-point correlator with N1 z indices")
    fp.add_argument("--out", default=None, help="also write fit.json and a manifest here")
    fp.set_defaults(func=cmd_fit)

    pp = sub.add_parser("presets", help="list built-in initial states")
    pp.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResonantNuError as exc:
        print(f"resonant nu: {exc}", file=sys.stderr)
        return EXIT_RESONANT
    except (NumericalFailure, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
