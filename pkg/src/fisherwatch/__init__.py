"""Covariance change-point detection via Fisher matrix spectral statistics."""

from .core import (
    DetectionConfig,
    DetectionRecord,
    FaultReport,
    StateMatrix,
    build_state_matrix,
    validate_config,
)
from .detect import Detection, DetectorTrace, dele_scan, deht_scan, localize, mp_scan, run_rule
from .rmt import (
    CltConstants,
    LsdParams,
    clt_constants,
    gaussian_quantile,
    lsd_cdf,
    lsd_density,
    mp_upper_edge,
    statistic_L,
    support_edges,
)
from .screening import ScreenResult, merge_intervals, screen, segment_boundaries
from .simgen import CovarianceEvent, Scenario, generate, sample_spd
from .spectral import (
    FisherSpectrum,
    WindowSplit,
    fisher_eigenvalues,
    fisher_trace_sq_dev,
    largest_eigenvalue,
    normalize_rows,
    sample_covariance,
)

__version__ = "0.1.0"

__all__ = [
    "DetectionConfig",
    "DetectionRecord",
    "FaultReport",
    "StateMatrix",
    "build_state_matrix",
    "validate_config",
    "Detection",
    "DetectorTrace",
    "dele_scan",
    "deht_scan",
    "localize",
    "mp_scan",
    "run_rule",
    "CltConstants",
    "LsdParams",
    "clt_constants",
    "gaussian_quantile",
    "lsd_cdf",
    "lsd_density",
    "mp_upper_edge",
    "statistic_L",
    "support_edges",
    "ScreenResult",
    "merge_intervals",
    "screen",
    "segment_boundaries",
    "CovarianceEvent",
    "Scenario",
    "generate",
    "sample_spd",
    "FisherSpectrum",
    "WindowSplit",
    "fisher_eigenvalues",
    "fisher_trace_sq_dev",
    "largest_eigenvalue",
    "normalize_rows",
    "sample_covariance",
]
