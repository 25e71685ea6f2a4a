"""Coarse interval screening: width-D segmentation and boundary tests.

The record is cut at t_i = i*D; each boundary gets a two-sample
covariance test between its neighbouring segments, and rejected
neighbourhoods [t_{i-1}+1, t_{i+1}] are merged into disjoint candidate
intervals. All sample indices in results are 1-based inclusive.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .core import DetectionConfig, StateMatrix, validate_config
from .errors import RecordTooShortError
from .rmt import TestOutcome, clt_constants, rejection_threshold, statistic_value
from .spectral import fisher_trace_sq_dev, normalize_rows, sample_covariance


def worker_count(n_tasks: int) -> int:
    """Parallelism cap: FISHERWATCH_THREADS env var, else cpu count."""
    env = os.environ.get("FISHERWATCH_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


@dataclass(frozen=True)
class ScreenResult:
    boundaries: tuple[int, ...]  # t_i = i*D, i = 1..N
    outcomes: tuple[TestOutcome, ...]  # one per boundary
    raw_intervals: tuple[tuple[int, int], ...]
    merged_intervals: tuple[tuple[int, int], ...]

    @property
    def rejections(self) -> tuple[bool, ...]:
        return tuple(o.reject for o in self.outcomes)


def segment_boundaries(T: int, D: int) -> list[int]:
    """Cut points t_i = i*D for i = 1..N with N = floor(T/D) - 1.

    The implied outer points are t_0 = 0 and t_{N+1} = T, so the final
    segment may be longer than D.
    """
    if D < 2:
        raise RecordTooShortError(f"segment width D={D} too small")
    if T < 2 * D:
        raise RecordTooShortError(
            f"record of length {T} cannot hold two segments of width D={D}"
        )
    N = T // D - 1
    return [i * D for i in range(1, N + 1)]


def merge_intervals(raw) -> list[tuple[int, int]]:
    """Union of overlapping or adjacent [lo, hi] inclusive intervals, sorted.

    Adjacent intervals (hi + 1 == lo') are merged as well: adjacency comes
    from consecutive rejections and represents a single fault region.
    """
    merged: list[list[int]] = []
    for lo, hi in sorted((int(lo), int(hi)) for lo, hi in raw):
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _boundary_test(X, segments, i: int, cfg: DetectionConfig, threshold: float) -> TestOutcome:
    """Test H0: equal covariance across boundary i (1-based)."""
    lo, mid, hi = segments[i - 1]
    ctx = f"boundary {i} at sample {mid}"
    # One shared normalization across both segments: per-segment row
    # statistics would absorb any variance change at the boundary and
    # leave the test blind to scale faults.
    Xn = normalize_rows(X[:, lo:hi], ctx)
    S1 = sample_covariance(Xn[:, : mid - lo])
    S2 = sample_covariance(Xn[:, mid - lo :])
    p = X.shape[0]
    n1, n2 = mid - lo, hi - mid
    consts = clt_constants(
        p / (n2 - 1), p / (n1 - 1), cfg.kappa, cfg.beta1, cfg.beta2
    )
    # Later segment in the numerator: a variance increase after the
    # boundary then pushes Fisher eigenvalues above 1, where the squared
    # deviation grows without bound, instead of compressing them into
    # [0, 1) where it saturates.
    trace = fisher_trace_sq_dev(S2, S1, ctx)
    L = statistic_value(trace, p, consts)
    return TestOutcome(L=L, threshold=threshold, reject=abs(L) >= threshold, position=mid)


def screen(X: StateMatrix, cfg: DetectionConfig) -> ScreenResult:
    """Run all boundary tests and merge rejected neighbourhoods."""
    cfg = validate_config(cfg, X.p)
    T, D = X.T, cfg.D
    boundaries = segment_boundaries(T, D)
    N = len(boundaries)
    threshold = rejection_threshold(cfg.alpha)
    # (lo, mid, hi) 0-based half-open column ranges per boundary
    segments = [
        ((i - 1) * D, i * D, (i + 1) * D if i < N else T) for i in range(1, N + 1)
    ]
    values = X.values
    with ThreadPoolExecutor(max_workers=worker_count(N)) as pool:
        outcomes = list(
            pool.map(
                lambda i: _boundary_test(values, segments, i, cfg, threshold),
                range(1, N + 1),
            )
        )
    raw = [
        ((i - 1) * D + 1, (i + 1) * D if i < N else T)
        for i, o in zip(range(1, N + 1), outcomes)
        if o.reject
    ]
    return ScreenResult(
        boundaries=tuple(boundaries),
        outcomes=tuple(outcomes),
        raw_intervals=tuple(raw),
        merged_intervals=tuple(merge_intervals(raw)),
    )
