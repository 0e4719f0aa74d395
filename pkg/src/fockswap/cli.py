"""Command-line entry point: ``fockswap run|calibrate|fit|validate|list-configs``.

Exit codes: 0 success, 1 other simulation error, 2 usage, 3 config error,
4 truncation or precondition error, 5 fit error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import ConfigError, FitError, FockSwapError, PreconditionError, TruncationError
from .fitting import MODEL_KINDS, FitModel, fit
from .runner import (
    CalibrationResult,
    bundled_configs,
    load_config,
    read_csv,
    resolve_config,
    run_calibration,
    run_config,
    validate_config,
)

EXIT_OK, EXIT_OTHER, EXIT_USAGE, EXIT_CONFIG, EXIT_TRUNCATION, EXIT_FIT = 0, 1, 2, 3, 4, 5


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fockswap", description="Simulate SWAP tests on trapped-ion motional modes.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a config (file path or bundled name) and write its CSV")
    run.add_argument("config")
    run.add_argument("-o", "--output", help="CSV path (default: the config's output, else <name>.csv)")
    run.add_argument("--threads", type=int, help="worker threads (overrides FOCKSWAP_THREADS)")

    cal = sub.add_parser("calibrate", help="simulate the coupling calibration and fit P0 sin^2(T omega0)")
    cal.add_argument("--omega0-hz", type=float, default=680.0)
    cal.add_argument("--shape", choices=("constant", "ramped"), default="constant")
    cal.add_argument("--ramp-tau", type=float, default=0.0, help="ramp time in seconds")
    cal.add_argument("--t-max", type=float, default=1.5e-3, help="longest duration in seconds")
    cal.add_argument("--points", type=int, default=31)
    cal.add_argument("--shots", type=int, default=500)
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--steps", type=int, default=200)
    cal.add_argument("-o", "--output", default="calibration.csv")

    f = sub.add_parser("fit", help="fit a model to two columns of a CSV")
    f.add_argument("model", choices=MODEL_KINDS)
    f.add_argument("csv")
    f.add_argument("--x", help="x column (default: first column)")
    f.add_argument("--y", help="y column (default: p_g_sampled, p_e_sampled or overlap_from_pg)")
    f.add_argument("--sigma", help="optional column of standard errors")

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")

    sub.add_parser("list-configs", help="list bundled configs")
    return p


def _json(d) -> str:
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, float) and not np.isfinite(v):
            return None
        return v
    return json.dumps(clean(d), indent=2)


def _column(header, rows, name):
    if name not in header:
        raise FitError(f"column {name!r} not in {header}")
    i = header.index(name)
    vals = [r[i] for r in rows]
    if any(v is None for v in vals):
        raise FitError(f"column {name!r} has empty cells")
    return np.array(vals, dtype=float)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out = args.output or config.output or f"{config.name}.csv"
    result = run_config(config, out, args.threads)
    print(f"{config.name}: {len(config.grid())} points -> {out}")
    if isinstance(result, CalibrationResult):
        print(_json(result.fit.as_dict()))
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    durations = np.linspace(0.0, args.t_max, args.points)
    res = run_calibration(2 * np.pi * args.omega0_hz, durations, args.shots, args.seed, shape=args.shape,
                          ramp_tau=args.ramp_tau, steps=args.steps, output=args.output)
    report = res.fit.as_dict()
    report["omega0_hz"] = res.fit["omega0"] / (2 * np.pi)
    print(_json(report))
    return EXIT_OK


def _cmd_fit(args) -> int:
    header, rows = read_csv(args.csv)
    x = args.x or header[0]
    y = args.y
    if y is None:
        y = next((c for c in ("p_g_sampled", "p_e_sampled") if c in header and rows and rows[0][header.index(c)] is not None),
                 "overlap_from_pg")
    sigma = _column(header, rows, args.sigma) if args.sigma else None
    try:
        res = fit(FitModel(args.model), _column(header, rows, x), _column(header, rows, y), sigma)
    except ValueError as exc:
        raise FitError(str(exc)) from exc
    print(_json(res.as_dict()))
    return EXIT_OK


def _cmd_validate(args) -> int:
    path = resolve_config(args.config)
    problems = validate_config(path)
    if problems:
        for msg in problems:
            print(f"{path}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{path}: ok")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handlers = {"run": _cmd_run, "calibrate": _cmd_calibrate, "fit": _cmd_fit, "validate": _cmd_validate}
    try:
        if args.command == "list-configs":
            print("\n".join(bundled_configs()))
            return EXIT_OK
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TruncationError, PreconditionError) as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (FockSwapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
