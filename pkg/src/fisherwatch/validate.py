"""Monte Carlo validation of the null distributions.

Draws standard Fisher matrices (two independent Gaussian samples with a
common identity covariance) and compares the empirical behaviour of the
test statistic and the eigenvalue bulk against their limiting laws.
"""
from __future__ import annotations

import numpy as np
from scipy import stats

from .rmt import clt_constants, lsd_cdf, rejection_threshold, statistic_value, support_edges
from .spectral import fisher_eigenvalues, fisher_trace_sq_dev, sample_covariance


def _draw_covariances(rng, p, n1, n2):
    S1 = sample_covariance(rng.standard_normal((p, n1)))
    S2 = sample_covariance(rng.standard_normal((p, n2)))
    return S1, S2


def null_statistic_sample(p, n1, n2, reps, seed=0) -> np.ndarray:
    """reps draws of the statistic L under equal covariances."""
    rng = np.random.default_rng(seed)
    consts = clt_constants(p / (n1 - 1), p / (n2 - 1))
    out = np.empty(reps)
    for r in range(reps):
        S1, S2 = _draw_covariances(rng, p, n1, n2)
        out[r] = statistic_value(fisher_trace_sq_dev(S1, S2), p, consts)
    return out


def null_calibration(p, n1, n2, reps, alpha=0.01, seed=0) -> dict:
    """Empirical mean/sd/size of L plus a KS distance against N(0, 1)."""
    Ls = null_statistic_sample(p, n1, n2, reps, seed)
    threshold = rejection_threshold(alpha)
    ks = stats.kstest(Ls, "norm").statistic
    return {
        "statistic_mean": float(Ls.mean()),
        "statistic_sd": float(Ls.std(ddof=1)),
        "empirical_size": float(np.mean(np.abs(Ls) >= threshold)),
        "ks_statistic_vs_gaussian": float(ks),
    }


def esd_vs_lsd_ks(p, n1, n2=None, seed=0) -> float:
    """KS distance between one standard Fisher ESD and the limiting CDF."""
    n2 = n2 if n2 is not None else n1
    rng = np.random.default_rng(seed)
    S1, S2 = _draw_covariances(rng, p, n1, n2)
    spec = fisher_eigenvalues(S1, S2, n1, n2)
    params = support_edges(spec.y_tau, spec.y_T)
    lam = np.sort(spec.eigenvalues)
    F = np.array([lsd_cdf(x, params) for x in lam])
    i = np.arange(1, p + 1)
    return float(max(np.max(np.abs(i / p - F)), np.max(np.abs((i - 1) / p - F))))


def edge_exceedance(p, n1, n2, reps, seed=0, slack=1.05) -> dict:
    """How often the top eigenvalue escapes the support edge b under H0."""
    rng = np.random.default_rng(seed)
    b = support_edges(p / (n1 - 1), p / (n2 - 1)).b
    above = above_slack = 0
    for _ in range(reps):
        S1, S2 = _draw_covariances(rng, p, n1, n2)
        l1 = fisher_eigenvalues(S1, S2, n1, n2).largest
        above += l1 > b
        above_slack += l1 > slack * b
    return {
        "edge": b,
        "rate_above_edge": above / reps,
        "rate_above_slack_edge": above_slack / reps,
        "slack": slack,
    }
