import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fisherwatch.core import DetectionConfig, validate_config
from fisherwatch.detect import (
    METHODS,
    dele_scan,
    deht_scan,
    localize,
    mp_scan,
    run_rule,
    slide_windows,
)
from fisherwatch.errors import RecordTooShortError
from fisherwatch.rmt import clt_constants, statistic_L
from fisherwatch.simgen import CovarianceEvent, Scenario, generate
from fisherwatch.spectral import window_spectrum


def event_record(p=20, T=1200, tau=600, factor=3.0, n_channels=8, seed=0):
    sc = Scenario(
        p=p,
        T=T,
        events=(
            CovarianceEvent(
                tau=tau, kind="scale-subset",
                channels=tuple(range(1, n_channels + 1)), factor=factor,
            ),
        ),
        seed=seed,
    )
    return generate(sc)[0]


class TestRunRule:
    def test_first_completed_run(self):
        assert run_rule([False, True, True, True], 3) == 4

    def test_single_flag(self):
        assert run_rule([False, False, True, False], 1) == 3

    def test_no_run(self):
        assert run_rule([True, False, True, False, True], 2) is None

    def test_empty(self):
        assert run_rule([], 1) is None

    def test_invalid_s(self):
        with pytest.raises(ValueError):
            run_rule([True], 0)

    @given(st.lists(st.booleans(), max_size=40), st.integers(1, 6))
    @settings(max_examples=300, deadline=None)
    def test_run_semantics(self, flags, s):
        k = run_rule(flags, s)
        if k is None:
            run = best = 0
            for f in flags:
                run = run + 1 if f else 0
                best = max(best, run)
            assert best < s
        else:
            assert all(flags[k - s:k])
            assert run_rule(flags[: k - 1], s) is None

    def test_monotone_in_s(self):
        rng = np.random.default_rng(0)
        flags = list(rng.random(60) < 0.5)
        found = [run_rule(flags, s) is not None for s in (1, 2, 4, 8)]
        assert found == sorted(found, reverse=True)


class TestSlideWindows:
    def test_window_count_matches_interval_arithmetic(self):
        data = np.random.default_rng(1).standard_normal((80, 1681))
        wins = list(slide_windows(data, 70, 90))
        assert len(wins) == 1522  # W - d + 1

    def test_layout_reference_then_probe(self):
        data = np.random.default_rng(2).standard_normal((4, 30))
        wins = list(slide_windows(data, 6, 9))
        assert len(wins) == 16
        w = wins[3]
        assert w.start == 3
        assert w.n1 == 9  # leading reference block, width d2
        assert w.n2 == 6  # trailing probe block, width d1
        assert np.array_equal(w.columns, data[:, 3:18])

    def test_too_short(self):
        data = np.zeros((4, 10))
        with pytest.raises(RecordTooShortError):
            list(slide_windows(data, 6, 9))


@pytest.fixture(scope="module")
def cfg():
    return validate_config(DetectionConfig(s=8), 20)


@pytest.fixture(scope="module")
def scanned(cfg):
    X = event_record(seed=4)
    interval = (541, 720)
    data = X.values[:, interval[0] - 1 : interval[1]]
    return {
        name: scan(data, cfg, interval)
        for name, scan in (("dele", dele_scan), ("deht", deht_scan), ("mp", mp_scan))
    }


class TestScans:
    def test_traces_cover_all_windows(self, cfg, scanned):
        for name, (trace, _) in scanned.items():
            assert trace.detector == name
            assert len(trace.values) == 180 - cfg.d + 1
            assert len(trace.flags) == len(trace.values)

    def test_flags_match_thresholds(self, scanned):
        tr, _ = scanned["dele"]
        assert np.array_equal(tr.flags, tr.values > tr.threshold)
        tr, _ = scanned["deht"]
        assert np.array_equal(tr.flags, tr.values >= tr.threshold)

    def test_detection_consistent_with_run_rule(self, cfg, scanned):
        for trace, det in scanned.values():
            k = run_rule(trace.flags, cfg.s)
            if det is None:
                assert k is None
            else:
                assert det.trigger_window == k
                assert det.fault_time == trace.interval[0] - 1 + k + cfg.d - 1
                assert det.consecutive_count == cfg.s

    def test_fisher_detectors_localize_the_change(self, cfg, scanned):
        tau = 600
        for name in ("dele", "deht"):
            _, det = scanned[name]
            assert det is not None, name
            assert tau < det.fault_time <= tau + cfg.d + cfg.s + 100

    def test_deht_values_match_eigen_route(self, cfg):
        # trace fast path and full spectrum must give the same statistic
        X = event_record(seed=6)
        data = X.values[:, 540:720]
        trace, _ = deht_scan(data, cfg, (541, 720))
        consts = clt_constants(
            20 / (cfg.d1 - 1), 20 / (cfg.d2 - 1), cfg.kappa, cfg.beta1, cfg.beta2
        )
        for k in (0, 37, 113):
            w = list(slide_windows(data, cfg.d1, cfg.d2))[k]
            ref = abs(statistic_L(window_spectrum(w), consts, 20))
            assert trace.values[k] == pytest.approx(ref, rel=1e-8)


class TestLocalize:
    def test_unknown_method(self):
        X = event_record()
        with pytest.raises(ValueError):
            localize(X, DetectionConfig(), method="svm")

    def test_end_to_end_detection_with_delay(self):
        X = event_record(seed=4)
        cfg = DetectionConfig(s=8)
        report = localize(X, cfg, method="dele", true_tau=600)
        assert any(lo <= 600 <= hi for lo, hi in report.screened_intervals)
        assert report.detections
        det = report.detections[0]
        assert det.detector == "dele"
        assert det.delay_samples == det.fault_time - 600
        assert det.interval in report.screened_intervals

    def test_methods_exported(self):
        assert METHODS == ("dele", "deht", "mp")

    def test_quiet_record_yields_no_detections(self):
        X = generate(Scenario(p=20, T=1200, seed=11))[0]
        report = localize(X, DetectionConfig(), method="deht")
        assert not report.detections
        assert len(report.traces) == len(report.screened_intervals)

    def test_traces_returned_per_interval(self):
        X = event_record(seed=4)
        report = localize(X, DetectionConfig(s=8), method="mp")
        assert len(report.traces) == len(report.screened_intervals)
        assert report.config.s == 8
