"""Core data model: state matrix, detection configuration, fault report.

Sample indices in all public reports are 1-based (column t of the state
matrix is sampling instant t); internal numpy storage is 0-based and the
conversion happens at the report boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, ShapeError

DEFAULT_ALPHA = 0.01

#: (s, D-rule) profiles; D may be given as a callable of p.
PROFILES = {
    "distribution": {"s": 16, "D": lambda p: 3 * p},
    "transmission": {"s": 9, "D": lambda p: p + 24},
}


@dataclass(frozen=True)
class StateMatrix:
    """p channels x T sampling instants of synchronized measurements."""

    values: np.ndarray
    channel_ids: tuple[str, ...]
    sample_rate_hz: Optional[float] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ShapeError(f"state matrix must be 2-D, got ndim={v.ndim}")
        p, T = v.shape
        if p < 2 or T < 2:
            raise ShapeError(f"need at least 2 channels and 2 samples, got {p}x{T}")
        if len(self.channel_ids) != p:
            raise ShapeError(
                f"{len(self.channel_ids)} channel ids for {p} channels"
            )
        if not np.isfinite(v).all():
            bad = np.argwhere(~np.isfinite(v))[0]
            raise DataError(
                f"non-finite entry at channel {bad[0] + 1}, sample {bad[1] + 1}"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "channel_ids", tuple(str(c) for c in self.channel_ids))

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def row(self, i: int) -> np.ndarray:
        """Channel series i (0-based)."""
        return self.values[i]


def build_state_matrix(
    rows: Sequence[Sequence[float]],
    channel_ids: Optional[Sequence[str]] = None,
    sample_rate_hz: Optional[float] = None,
) -> StateMatrix:
    """Stack equal-length channel series into a state matrix, row order preserved."""
    if len(rows) < 2:
        raise ShapeError(f"need at least 2 channel series, got {len(rows)}")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ShapeError(f"ragged channel series, lengths {sorted(lengths)}")
    if channel_ids is None:
        channel_ids = [f"ch{i + 1}" for i in range(len(rows))]
    return StateMatrix(
        values=np.asarray(rows, dtype=float),
        channel_ids=tuple(channel_ids),
        sample_rate_hz=sample_rate_hz,
    )


@dataclass(frozen=True)
class DetectionConfig:
    """Tuning parameters for screening and point-by-point detection.

    Unset (None) values are filled from the profile defaults by
    :func:`validate_config`: d1 = p - 10, d2 = p + 10, D per profile,
    plus the profile's consecutive-rejection count s.
    """

    D: Optional[int] = None
    d1: Optional[int] = None
    d2: Optional[int] = None
    s: Optional[int] = None
    alpha: float = DEFAULT_ALPHA
    kappa: int = 2
    beta1: float = 0.0
    beta2: float = 0.0
    profile: str = "distribution"
    _checked_for: Optional[int] = field(default=None, repr=False, compare=False)

    @property
    def d(self) -> int:
        if self.d1 is None or self.d2 is None:
            raise ConfigError("window widths unset; call validate_config first")
        return self.d1 + self.d2


def validate_config(cfg: DetectionConfig, p: int) -> DetectionConfig:
    """Fill defaults for dimension p and enforce all parameter constraints.

    Idempotent: a config already checked for this p is returned unchanged.
    """
    if cfg._checked_for == p:
        return cfg
    if p < 2:
        raise ConfigError(f"need p >= 2 channels, got p={p}")
    if cfg.profile not in PROFILES:
        raise ConfigError(f"unknown profile {cfg.profile!r}")
    prof = PROFILES[cfg.profile]
    d1 = cfg.d1 if cfg.d1 is not None else max(p - 10, 2)
    d2 = cfg.d2 if cfg.d2 is not None else p + 10
    D = cfg.D if cfg.D is not None else prof["D"](p)
    s = cfg.s if cfg.s is not None else prof["s"]

    if d2 <= p:
        raise ConfigError(
            f"d2={d2} must exceed p={p} so the second sample covariance is invertible"
        )
    if d1 < 2:
        raise ConfigError(f"d1={d1} must be at least 2")
    if D < p + 1:
        raise ConfigError(f"segment width D={D} must be at least p+1={p + 1}")
    if s < 1:
        raise ConfigError(f"consecutive count s={s} must be >= 1")
    if not 0.0 < cfg.alpha < 1.0:
        raise ConfigError(f"alpha={cfg.alpha} must lie in (0, 1)")
    if cfg.kappa not in (1, 2):
        raise ConfigError(f"kappa={cfg.kappa} must be 1 (complex) or 2 (real)")
    return replace(cfg, D=D, d1=d1, d2=d2, s=s, _checked_for=p)


@dataclass(frozen=True)
class DetectionRecord:
    """One localized change point inside a screened interval."""

    interval: tuple[int, int]
    fault_time: int
    detector: str
    trigger_window: int
    delay_samples: Optional[int] = None

    def __post_init__(self):
        lo, hi = self.interval
        if not lo <= self.fault_time <= hi:
            raise ShapeError(
                f"fault time {self.fault_time} outside interval [{lo}, {hi}]"
            )


@dataclass(frozen=True)
class FaultReport:
    """Aggregated output of the screening + point-by-point pipeline."""

    screened_intervals: tuple[tuple[int, int], ...]
    detections: tuple[DetectionRecord, ...]
    traces: tuple = ()
    config: Optional[DetectionConfig] = None

    def __post_init__(self):
        ivs = self.screened_intervals
        if list(ivs) != sorted(ivs):
            raise ShapeError("screened intervals must be sorted ascending")
        for (a_lo, a_hi), (b_lo, b_hi) in zip(ivs, ivs[1:]):
            if b_lo <= a_hi:
                raise ShapeError("screened intervals must be pairwise disjoint")
