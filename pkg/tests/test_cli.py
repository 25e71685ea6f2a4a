import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from fisherwatch import io
from fisherwatch.cli import main
from fisherwatch.simgen import Scenario, generate

SCENARIO = {
    "p": 20,
    "T": 1200,
    "events": [
        {"tau": 600, "kind": "scale-subset", "channels": [1, 2, 3, 4, 5, 6, 7, 8],
         "factor": 3.0}
    ],
    "seed": 4,
}


def load_schema(name):
    ref = resources.files("fisherwatch") / "schemas" / name
    return json.loads(ref.read_text())


def validate(doc, schema_name):
    jsonschema.validate(doc, load_schema(schema_name))


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SCENARIO))
    return path


@pytest.fixture
def data_file(tmp_path):
    X, _ = generate(io.parse_scenario(SCENARIO))
    path = tmp_path / "data.csv"
    io.write_state_csv(path, X)
    return path


class TestSimulate:
    def test_artifacts_and_truth(self, tmp_path, scenario_file):
        out = tmp_path / "out"
        assert main(["simulate", str(scenario_file), "--out-dir", str(out)]) == 0
        truth = json.loads((out / "truth.json").read_text())
        assert truth["change_times"] == [600]
        assert (out / "data.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "simulate"
        assert set(manifest["artifacts"]) == {"data.csv", "truth.json"}

    def test_csv_round_trip_exact(self, tmp_path, scenario_file):
        out = tmp_path / "out"
        main(["simulate", str(scenario_file), "--out-dir", str(out)])
        X = io.read_state_csv(out / "data.csv")
        ref, _ = generate(io.parse_scenario(SCENARIO))
        assert np.array_equal(X.values, ref.values)

    def test_seed_override(self, tmp_path, scenario_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["simulate", str(scenario_file), "--out-dir", str(out1), "--seed", "99"])
        main(["simulate", str(scenario_file), "--out-dir", str(out2)])
        a = io.read_state_csv(out1 / "data.csv")
        b = io.read_state_csv(out2 / "data.csv")
        assert not np.array_equal(a.values, b.values)

    def test_byte_identical_reruns(self, tmp_path, scenario_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            main(["simulate", str(scenario_file), "--out-dir", str(out)])
        for name in ("data.csv", "truth.json", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestScreen:
    def test_report_schema_and_series(self, tmp_path, data_file):
        out = tmp_path / "out"
        assert main(["screen", str(data_file), "--out-dir", str(out)]) == 0
        doc = json.loads((out / "report.json").read_text())
        validate(doc, "report.schema.json")
        assert doc["kind"] == "screen"
        series = (out / "series.csv").read_text().splitlines()
        assert series[0] == "boundary_index,t_i,L_i,threshold,reject"
        assert len(series) == 1 + len(doc["boundaries"])

    def test_byte_identical_reruns(self, tmp_path, data_file):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            main(["screen", str(data_file), "--out-dir", str(out)])
        for name in ("report.json", "series.csv", "manifest.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_config_file(self, tmp_path, data_file):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"D": 100, "alpha": 0.05}))
        out = tmp_path / "out"
        assert main(["screen", str(data_file), "--config", str(cfg),
                     "--out-dir", str(out)]) == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["config"]["D"] == 100
        assert doc["config"]["alpha"] == 0.05

    def test_transpose_flag(self, tmp_path, data_file):
        X = io.read_state_csv(data_file)
        tpath = tmp_path / "wide.csv"
        with open(tpath, "w") as fh:
            for t in range(X.T):
                fh.write(
                    f"{t + 1}," + ",".join(repr(float(v)) for v in X.values[:, t]) + "\n"
                )
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["screen", str(data_file), "--out-dir", str(out1)])
        main(["screen", str(tpath), "--transpose", "--out-dir", str(out2)])
        d1 = json.loads((out1 / "report.json").read_text())
        d2 = json.loads((out2 / "report.json").read_text())
        assert d1["statistics"] == d2["statistics"]


class TestDetect:
    def test_detect_report_and_traces(self, tmp_path, data_file):
        out = tmp_path / "out"
        code = main(["detect", str(data_file), "--method", "deht", "--true-tau", "600",
                     "--out-dir", str(out)])
        assert code == 0
        doc = json.loads((out / "report.json").read_text())
        validate(doc, "report.schema.json")
        assert doc["kind"] == "detect"
        assert doc["method"] == "deht"
        for det in doc["detections"]:
            assert det["delay_samples"] == det["fault_time"] - 600
        traces = (out / "traces.csv").read_text().splitlines()
        assert traces[0] == "interval_id,k,value,threshold,flag"

    def test_default_method_is_dele(self, tmp_path, data_file):
        out = tmp_path / "out"
        main(["detect", str(data_file), "--out-dir", str(out)])
        doc = json.loads((out / "report.json").read_text())
        assert doc["method"] == "dele"


class TestValidateNull:
    def test_calibration_schema(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "validate-null", "--reps", "150", "--p", "16", "--n1", "64", "--n2", "64",
            "--esd-p", "32", "--esd-n", "128", "--out-dir", str(out),
        ])
        assert code == 0
        doc = json.loads((out / "calibration.json").read_text())
        validate(doc, "calibration.schema.json")
        assert doc["reps"] == 150
        assert doc["seed"] == 12345
        assert 0.0 <= doc["empirical_size"] <= 1.0

    def test_too_few_reps(self, tmp_path, capsys):
        code = main(["validate-null", "--reps", "10", "--out-dir", str(tmp_path)])
        assert code == 2
        assert capsys.readouterr().err.startswith("config-error:")


class TestBench:
    def test_timings_schema(self, tmp_path, data_file):
        out = tmp_path / "out"
        code = main(["bench", str(data_file), "--repeats", "1", "--out-dir", str(out)])
        assert code == 0
        doc = json.loads((out / "timings.json").read_text())
        validate(doc, "timings.schema.json")
        assert set(doc["timings"]) == {"dele", "deht", "mp"}


class TestExitCodes:
    def test_missing_input_file(self, tmp_path, capsys):
        code = main(["screen", str(tmp_path / "nope.csv"), "--out-dir", str(tmp_path)])
        assert code == 2
        err = capsys.readouterr().err
        assert err.rstrip().count("\n") == 0  # one-line reason

    def test_empty_input_file(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text("")
        code = main(["screen", str(path), "--out-dir", str(tmp_path)])
        assert code == 2
        assert capsys.readouterr().err.startswith("data-error:")

    def test_malformed_scenario(self, tmp_path, capsys):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"p": 4}))
        code = main(["simulate", str(path), "--out-dir", str(tmp_path)])
        assert code == 2
        assert capsys.readouterr().err.startswith("scenario-error:")

    def test_shape_error_exit_three(self, tmp_path, capsys):
        # record far too short for any segmentation
        path = tmp_path / "short.csv"
        path.write_text("ch1,1.0,2.0,3.0\nch2,4.0,5.0,6.0\n")
        code = main(["screen", str(path), "--out-dir", str(tmp_path)])
        assert code == 3
        assert capsys.readouterr().err.startswith("record-too-short:")

    def test_bad_config_value(self, tmp_path, data_file, capsys):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"alpha": 7.0}))
        code = main(["screen", str(data_file), "--config", str(cfg),
                     "--out-dir", str(tmp_path)])
        assert code == 2
        assert capsys.readouterr().err.startswith("config-error:")
