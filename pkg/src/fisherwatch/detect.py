"""Point-by-point localization inside screened intervals.

Three sliding-window detectors over each candidate interval:

* ``dele`` flags windows whose largest Fisher eigenvalue exceeds the
  upper support edge b of the limiting law (strict >);
* ``deht`` flags windows whose standardized statistic |L_k| reaches the
  Gaussian quantile threshold (closed >=, matching the rejection region);
* ``mp`` is the Marchenko-Pastur baseline on the plain sample covariance.

A fault is declared only after s consecutive flagged windows; the
declared time is the last column of the window completing the run.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .core import (
    DetectionConfig,
    DetectionRecord,
    FaultReport,
    StateMatrix,
    validate_config,
)
from .errors import RecordTooShortError
from .rmt import (
    clt_constants,
    mp_upper_edge,
    rejection_threshold,
    statistic_value,
    support_edges,
)
from .screening import screen, worker_count
from .spectral import (
    WindowSplit,
    fisher_trace_sq_dev,
    normalize_rows,
    sample_covariance,
    window_spectrum,
)

METHODS = ("dele", "deht", "mp")


@dataclass(frozen=True)
class DetectorTrace:
    """Per-window values of one detector over one interval."""

    detector: str
    interval: tuple[int, int]  # 1-based inclusive sample range
    values: np.ndarray  # lambda_1k, |L_k| or lambda_max, window k = 1..K
    threshold: float
    flags: np.ndarray


@dataclass(frozen=True)
class Detection:
    fault_time: int  # absolute 1-based sample index
    trigger_window: int  # k_s, 1-based within the interval
    consecutive_count: int
    detector: str


def slide_windows(data: np.ndarray, d1: int, d2: int) -> Iterator[WindowSplit]:
    """Step-1 sliding windows of width d = d1 + d2.

    Window k (0-based start k) covers columns [k, k + d - 1]: a leading
    reference block of width d2 and a trailing probe block of width d1.
    """
    d = d1 + d2
    W = data.shape[1]
    if W < d:
        raise RecordTooShortError(
            f"interval of width {W} cannot hold one window of width {d}"
        )
    for k in range(W - d + 1):
        yield WindowSplit(start=k, n1=d2, n2=d1, columns=data[:, k : k + d])


def run_rule(flags, s: int) -> Optional[int]:
    """Smallest 1-based index ending a run of s consecutive true flags."""
    if s < 1:
        raise ValueError(f"run length s={s} must be >= 1")
    run = 0
    for j, f in enumerate(flags, start=1):
        run = run + 1 if f else 0
        if run >= s:
            return j
    return None


def _finish(
    detector: str,
    interval: tuple[int, int],
    values: np.ndarray,
    threshold: float,
    flags: np.ndarray,
    cfg: DetectionConfig,
) -> tuple[DetectorTrace, Optional[Detection]]:
    trace = DetectorTrace(
        detector=detector,
        interval=interval,
        values=values,
        threshold=threshold,
        flags=flags,
    )
    k_s = run_rule(flags, cfg.s)
    if k_s is None:
        return trace, None
    det = Detection(
        fault_time=interval[0] - 1 + k_s + cfg.d - 1,
        trigger_window=k_s,
        consecutive_count=cfg.s,
        detector=detector,
    )
    return trace, det


def dele_scan(
    data: np.ndarray, cfg: DetectionConfig, interval: tuple[int, int]
) -> tuple[DetectorTrace, Optional[Detection]]:
    """Largest-eigenvalue detector; threshold is the support edge b.

    b depends only on (d1, d2), so it is computed once per interval.
    """
    p = data.shape[0]
    b = support_edges(p / (cfg.d1 - 1), p / (cfg.d2 - 1)).b
    values = np.array(
        [
            window_spectrum(w, f"window {w.start + 1}").largest
            for w in slide_windows(data, cfg.d1, cfg.d2)
        ]
    )
    return _finish("dele", interval, values, b, values > b, cfg)


def deht_scan(
    data: np.ndarray, cfg: DetectionConfig, interval: tuple[int, int]
) -> tuple[DetectorTrace, Optional[Detection]]:
    """Statistic-based detector; no eigendecomposition on the hot path."""
    p = data.shape[0]
    consts = clt_constants(
        p / (cfg.d1 - 1), p / (cfg.d2 - 1), cfg.kappa, cfg.beta1, cfg.beta2
    )
    threshold = rejection_threshold(cfg.alpha)
    values = []
    for w in slide_windows(data, cfg.d1, cfg.d2):
        ctx = f"window {w.start + 1}"
        Xn = normalize_rows(w.columns, ctx)
        S_ref = sample_covariance(Xn[:, : w.n1])
        S_probe = sample_covariance(Xn[:, w.n1 :])
        trace = fisher_trace_sq_dev(S_probe, S_ref, ctx)
        values.append(abs(statistic_value(trace, p, consts)))
    values = np.array(values)
    return _finish("deht", interval, values, threshold, values >= threshold, cfg)


def mp_scan(
    data: np.ndarray, cfg: DetectionConfig, interval: tuple[int, int]
) -> tuple[DetectorTrace, Optional[Detection]]:
    """Baseline: largest covariance eigenvalue vs the Marchenko-Pastur edge.

    The whole width-d window is one sample; no two-population split.
    """
    p = data.shape[0]
    d = cfg.d
    edge = mp_upper_edge(p / (d - 1))
    W = data.shape[1]
    if W < d:
        raise RecordTooShortError(
            f"interval of width {W} cannot hold one window of width {d}"
        )
    values = []
    for k in range(W - d + 1):
        seg = normalize_rows(data[:, k : k + d], f"window {k + 1}")
        values.append(float(np.linalg.eigvalsh(sample_covariance(seg))[-1]))
    values = np.array(values)
    return _finish("mp", interval, values, edge, values > edge, cfg)


_SCANS = {"dele": dele_scan, "deht": deht_scan, "mp": mp_scan}


def localize(
    X: StateMatrix,
    cfg: DetectionConfig,
    method: str = "dele",
    true_tau: Optional[int] = None,
) -> FaultReport:
    """Screen the record, then scan each merged interval with one detector.

    Reports the first detection per interval; ``true_tau`` (1-based)
    attaches the detection delay in samples.
    """
    if method not in _SCANS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    cfg = validate_config(cfg, X.p)
    screened = screen(X, cfg)
    scan = _SCANS[method]
    intervals = screened.merged_intervals

    def scan_one(iv):
        lo, hi = iv
        return scan(X.values[:, lo - 1 : hi], cfg, iv)

    if intervals:
        with ThreadPoolExecutor(max_workers=worker_count(len(intervals))) as pool:
            results = list(pool.map(scan_one, intervals))
    else:
        results = []

    traces = tuple(trace for trace, _ in results)
    detections = tuple(
        DetectionRecord(
            interval=trace.interval,
            fault_time=det.fault_time,
            detector=det.detector,
            trigger_window=det.trigger_window,
            delay_samples=(det.fault_time - true_tau) if true_tau is not None else None,
        )
        for trace, det in results
        if det is not None
    )
    return FaultReport(
        screened_intervals=intervals,
        detections=detections,
        traces=traces,
        config=cfg,
    )
