"""Command-line interface.

Exit codes: 0 success, 2 input/config error, 3 data-shape error. On
failure stderr carries a single machine-parsable line ``<code>: <why>``.
All output files are written after computation completes.
"""
from __future__ import annotations

import argparse
import json
import statistics as pystats
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import io
from .core import validate_config
from .detect import METHODS, localize
from .errors import ConfigError, FisherwatchError, ShapeError
from .screening import screen
from .simgen import generate
from .validate import esd_vs_lsd_ks, null_calibration

DEFAULT_SEED = 12345
MIN_REPS = 100

EXIT_INPUT = 2
EXIT_SHAPE = 3


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args):
    if args.config:
        return io.parse_config(io.load_json(args.config))
    return io.parse_config({})


def cmd_simulate(args) -> int:
    doc = io.load_json(args.scenario)
    scenario = io.parse_scenario(doc)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    X, truth = generate(scenario)
    out = _out_dir(args)
    data_path = out / "data.csv"
    truth_path = out / "truth.json"
    io.write_state_csv(data_path, X)
    io.write_json(truth_path, {"schema_version": io.SCHEMA_VERSION, **truth})
    io.write_manifest(
        out, "simulate", [args.scenario], [data_path, truth_path],
        seed=scenario.seed, config=doc,
    )
    return 0


def cmd_screen(args) -> int:
    X = io.read_state_csv(args.data, transpose=args.transpose)
    cfg = validate_config(_load_config(args), X.p)
    result = screen(X, cfg)
    out = _out_dir(args)
    report_path = out / "report.json"
    series_path = out / "series.csv"
    io.write_json(report_path, io.screen_report(result, cfg))
    io.write_screen_series(series_path, result)
    io.write_manifest(
        out, "screen", [args.data], [report_path, series_path],
        config=io.config_echo(cfg),
    )
    return 0


def cmd_detect(args) -> int:
    X = io.read_state_csv(args.data, transpose=args.transpose)
    cfg = validate_config(_load_config(args), X.p)
    report = localize(X, cfg, method=args.method, true_tau=args.true_tau)
    out = _out_dir(args)
    report_path = out / "report.json"
    traces_path = out / "traces.csv"
    io.write_json(report_path, io.detect_report(report, args.method))
    io.write_detect_traces(traces_path, report)
    io.write_manifest(
        out, "detect", [args.data], [report_path, traces_path],
        config=io.config_echo(cfg),
    )
    return 0


def cmd_validate_null(args) -> int:
    if args.reps < MIN_REPS:
        raise ConfigError(f"need at least {MIN_REPS} replications, got {args.reps}")
    cfg = _load_config(args)
    cfg = validate_config(cfg, args.p)
    calib = null_calibration(
        args.p, args.n1, args.n2, args.reps, alpha=cfg.alpha, seed=args.seed
    )
    ks_esd = esd_vs_lsd_ks(args.esd_p, args.esd_n, seed=args.seed)
    out = _out_dir(args)
    calib_path = out / "calibration.json"
    io.write_json(
        calib_path,
        {
            "schema_version": io.SCHEMA_VERSION,
            "reps": args.reps,
            "p": args.p,
            "n1": args.n1,
            "n2": args.n2,
            "esd_p": args.esd_p,
            "esd_n": args.esd_n,
            "alpha": cfg.alpha,
            "seed": args.seed,
            "ks_esd_vs_lsd": ks_esd,
            **calib,
        },
    )
    inputs = [args.config] if args.config else []
    io.write_manifest(
        out, "validate-null", inputs, [calib_path],
        seed=args.seed, config=io.config_echo(cfg),
    )
    return 0


def cmd_bench(args) -> int:
    X = io.read_state_csv(args.data, transpose=args.transpose)
    cfg = validate_config(_load_config(args), X.p)
    timings = {}
    for method in METHODS:
        runs = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            localize(X, cfg, method=method)
            runs.append(time.perf_counter() - t0)
        timings[method] = {
            "median_seconds": pystats.median(runs),
            "runs_seconds": runs,
        }
    out = _out_dir(args)
    timings_path = out / "timings.json"
    io.write_json(
        timings_path,
        {
            "schema_version": io.SCHEMA_VERSION,
            "repeats": args.repeats,
            "timings": timings,
        },
    )
    io.write_manifest(
        out, "bench", [args.data], [timings_path], config=io.config_echo(cfg)
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fisherwatch",
        description="Covariance change-point detection via Fisher matrix spectra",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic stream from a scenario")
    sim.add_argument("scenario", help="scenario JSON file")
    sim.add_argument("--out-dir", required=True)
    sim.add_argument("--seed", type=int, default=None, help="override scenario seed")
    sim.set_defaults(func=cmd_simulate)

    def data_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("data", help="channel-per-row CSV")
        p.add_argument("--config", help="detection config JSON")
        p.add_argument("--out-dir", required=True)
        p.add_argument("--transpose", action="store_true",
                       help="input CSV is sample-per-row")
        return p

    scr = data_cmd("screen", "screen candidate fault intervals")
    scr.set_defaults(func=cmd_screen)

    det = data_cmd("detect", "screen then localize change points")
    det.add_argument("--method", choices=METHODS, default="dele")
    det.add_argument("--true-tau", type=int, default=None,
                     help="known change time, for delay reporting")
    det.set_defaults(func=cmd_detect)

    val = sub.add_parser("validate-null", help="Monte Carlo null calibration")
    val.add_argument("--config", help="detection config JSON")
    val.add_argument("--reps", type=int, default=2000)
    val.add_argument("--p", type=int, default=80)
    val.add_argument("--n1", type=int, default=240)
    val.add_argument("--n2", type=int, default=240)
    val.add_argument("--esd-p", type=int, default=200)
    val.add_argument("--esd-n", type=int, default=1000)
    val.add_argument("--seed", type=int, default=DEFAULT_SEED)
    val.add_argument("--out-dir", required=True)
    val.set_defaults(func=cmd_validate_null)

    ben = data_cmd("bench", "time the three detectors on one input")
    ben.add_argument("--repeats", type=int, default=5)
    ben.set_defaults(func=cmd_bench)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ShapeError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (FisherwatchError, ValueError, json.JSONDecodeError) as exc:
        code = getattr(exc, "code", "input-error")
        print(f"{code}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
