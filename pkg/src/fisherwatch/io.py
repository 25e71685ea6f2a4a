"""File formats: CSV streams, JSON configs/scenarios/reports, manifests.

CSV orientation is rows = channels (column 1 the channel id, optional
header row of sample indices); JSON documents are written with sorted
keys so identical runs produce identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .core import DetectionConfig, FaultReport, StateMatrix
from .errors import ConfigError, DataError, ScenarioError, ShapeError
from .screening import ScreenResult
from .simgen import CovarianceEvent, Scenario

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# CSV

def write_state_csv(path, X: StateMatrix, header: bool = True):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(["channel"] + [str(t) for t in range(1, X.T + 1)])
        for cid, row in zip(X.channel_ids, X.values):
            w.writerow([cid] + [repr(float(v)) for v in row])


def read_state_csv(path, transpose: bool = False) -> StateMatrix:
    """Parse a channel-per-row CSV; ``transpose`` accepts column-major exports."""
    rows = []
    try:
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if rec:
                    rows.append(rec)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")
    # header row: non-numeric data cells, or a label in the id column
    # (sample indices in a header parse as floats, so check both)
    def is_data(rec):
        try:
            [float(v) for v in rec[1:]]
            return len(rec) > 1
        except ValueError:
            return False

    header_labels = {"", "channel", "sample", "time", "index"}
    if rows[0][0].strip().lower() in header_labels or not is_data(rows[0]):
        rows = rows[1:]
    if not rows or not all(is_data(r) for r in rows):
        raise DataError(f"{path}: not a numeric channel-per-row CSV")
    ids = [r[0] for r in rows]
    try:
        values = np.array([[float(v) for v in r[1:]] for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: ragged or non-numeric rows") from exc
    if transpose:
        values = values.T
        ids = [f"ch{i + 1}" for i in range(values.shape[0])]
    return StateMatrix(values=values, channel_ids=tuple(ids))


# ---------------------------------------------------------------------------
# JSON configs and scenarios

def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(doc: dict) -> DetectionConfig:
    known = {"D", "d1", "d2", "s", "alpha", "kappa", "beta1", "beta2", "profile"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    defaults = DetectionConfig()
    return DetectionConfig(
        D=doc.get("D"),
        d1=doc.get("d1"),
        d2=doc.get("d2"),
        s=doc.get("s"),
        alpha=float(doc.get("alpha", defaults.alpha)),
        kappa=int(doc.get("kappa", defaults.kappa)),
        beta1=float(doc.get("beta1", defaults.beta1)),
        beta2=float(doc.get("beta2", defaults.beta2)),
        profile=doc.get("profile", defaults.profile),
    )


def config_echo(cfg: Optional[DetectionConfig]) -> dict:
    if cfg is None:
        return {}
    return {
        "D": cfg.D, "d1": cfg.d1, "d2": cfg.d2, "s": cfg.s,
        "alpha": cfg.alpha, "kappa": cfg.kappa,
        "beta1": cfg.beta1, "beta2": cfg.beta2, "profile": cfg.profile,
    }


def parse_scenario(doc: dict) -> Scenario:
    try:
        base = doc.get("base_cov", {"kind": "identity"})
        events = []
        for e in doc.get("events", []):
            events.append(
                CovarianceEvent(
                    tau=int(e["tau"]),
                    kind=e["kind"],
                    channels=tuple(int(c) for c in e.get("channels", [])),
                    factor=float(e.get("factor", 1.0)),
                    direction=(
                        tuple(float(v) for v in e["direction"])
                        if e.get("direction") is not None
                        else None
                    ),
                    strength=float(e.get("strength", 0.0)),
                    matrix=(
                        np.asarray(e["matrix"], dtype=float)
                        if e.get("matrix") is not None
                        else None
                    ),
                    end=int(e["end"]) if e.get("end") is not None else None,
                )
            )
        params = {k: v for k, v in base.items() if k != "kind"}
        if "matrix" in params:
            params["matrix"] = np.asarray(params["matrix"], dtype=float)
        return Scenario(
            p=int(doc["p"]),
            T=int(doc["T"]),
            base_cov_kind=base.get("kind", "identity"),
            base_cov_params=params,
            events=tuple(events),
            noise_sigma=float(doc.get("noise_sigma", 1e-4)),
            seed=int(doc.get("seed", 0)),
            ar1=float(doc.get("ar1", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


# ---------------------------------------------------------------------------
# Reports

def screen_report(result: ScreenResult, cfg: DetectionConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "screen",
        "boundaries": list(result.boundaries),
        "statistics": [o.L for o in result.outcomes],
        "threshold": result.outcomes[0].threshold if result.outcomes else None,
        "rejections": [bool(v) for v in result.rejections],
        "raw_intervals": [list(iv) for iv in result.raw_intervals],
        "merged_intervals": [list(iv) for iv in result.merged_intervals],
        "config": config_echo(cfg),
    }


def detect_report(report: FaultReport, method: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "detect",
        "method": method,
        "screened_intervals": [list(iv) for iv in report.screened_intervals],
        "detections": [
            {
                "interval": list(d.interval),
                "fault_time": d.fault_time,
                "detector": d.detector,
                "trigger_window": d.trigger_window,
                "delay_samples": d.delay_samples,
            }
            for d in report.detections
        ],
        "config": config_echo(report.config),
    }


def write_screen_series(path, result: ScreenResult):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["boundary_index", "t_i", "L_i", "threshold", "reject"])
        for i, o in enumerate(result.outcomes, start=1):
            w.writerow([i, o.position, repr(o.L), repr(o.threshold), int(o.reject)])


def write_detect_traces(path, report: FaultReport):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["interval_id", "k", "value", "threshold", "flag"])
        for j, trace in enumerate(report.traces, start=1):
            for k, (v, f) in enumerate(zip(trace.values, trace.flags), start=1):
                w.writerow([j, k, repr(float(v)), repr(trace.threshold), int(f)])


def write_json(path, doc: dict):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Manifest

def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, subcommand: str, inputs, artifacts, seed=None, config=None):
    """Record input/output checksums; identical inputs give identical bytes."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "seed": seed,
        "config": config or {},
        "inputs": {Path(p).name: sha256_of(p) for p in inputs},
        "artifacts": {Path(p).name: sha256_of(p) for p in artifacts},
    }
    path = Path(out_dir) / "manifest.json"
    write_json(path, doc)
    return path
