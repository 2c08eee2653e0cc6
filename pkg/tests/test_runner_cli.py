import csv
import json
import os

import numpy as np
import pytest

from qent.cli import main
from qent.config import validate_config, validate_sweep
from qent.runner import run_experiment, run_sweep

from test_config import minimal_config


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


@pytest.fixture()
def run_config(tmp_path):
    raw = minimal_config()
    raw["output"] = {"directory": str(tmp_path / "out")}
    raw["analysis"] = {"replica_check": True}
    return raw


class TestRunExperiment:
    def test_writes_report_figure_and_replica_check(self, run_config, tmp_path):
        written = run_experiment(validate_config(run_config))
        assert os.path.exists(written["report"])
        assert os.path.exists(written["replica_check"])
        assert os.path.exists(written["figure"])
        payload = json.loads(open(written["report"]).read())
        assert payload["entropy"]["entropy_nats"]["subtracted"]["1"] >= 0
        assert payload["provenance"]["package"] == "qent"
        check = json.loads(open(written["replica_check"]).read())
        assert check["max_deviation"] < 1e-9

    def test_vacuum_only_recipe_subtracts_to_zero(self, tmp_path):
        raw = {
            "model": {
                "statistics": "bose", "sites": 4, "species": 1, "hopping": 0.0,
                "mass": 1.0, "regime": "boson_ground", "boson_cutoff": 1,
            },
            "packets": [{"name": "a", "center": 0.5, "width": 1.0, "shape": "rect"}],
            "state": {"terms": [{"coefficient": 1.0, "operators": []}]},
            "region": {"sites": [0, 1]},
            "output": {"directory": str(tmp_path), "formats": ["json"]},
        }
        written = run_experiment(validate_config(raw))
        payload = json.loads(open(written["report"]).read())
        for value in payload["entropy"]["entropy_nats"]["subtracted"].values():
            assert abs(value) < 1e-10

    def test_determinism_up_to_timing(self, run_config, tmp_path):
        config = validate_config(run_config)
        p1 = run_experiment(config, out_dir=str(tmp_path / "r1"))["report"]
        p2 = run_experiment(config, out_dir=str(tmp_path / "r2"))["report"]
        d1 = json.loads(open(p1).read())
        d2 = json.loads(open(p2).read())
        d1["provenance"].pop("timing_seconds")
        d2["provenance"].pop("timing_seconds")
        assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)

    def test_out_dir_override(self, run_config, tmp_path):
        target = tmp_path / "elsewhere"
        written = run_experiment(validate_config(run_config), out_dir=str(target))
        assert os.path.dirname(written["report"]) == str(target)

    def test_formats_control_outputs(self, run_config, tmp_path):
        run_config["output"]["formats"] = ["json"]
        written = run_experiment(validate_config(run_config), out_dir=str(tmp_path / "j"))
        assert "figure" not in written and "report" in written


class TestRunSweep:
    def make_spec(self, tmp_path, jobs_values=(2, 3, 4)):
        base = minimal_config()
        base["output"] = {"directory": str(tmp_path / "sweep")}
        return validate_sweep(
            {"base": base, "parameter": "separation", "values": list(jobs_values)}
        )

    def test_csv_columns_and_rows(self, tmp_path):
        spec = self.make_spec(tmp_path)
        written = run_sweep(spec)
        with open(written["csv"]) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:8] == [
            "separation", "overlap_abs", "delta_S1", "delta_S2", "delta_S3",
            "norm_dev", "vac_S1", "vac_S2",
        ]
        assert rows[0][-1] == "error"
        assert len(rows) == 4
        separations = [float(r[0]) for r in rows[1:]]
        assert separations == [2.0, 3.0, 4.0]

    def test_summary_contents(self, tmp_path):
        spec = self.make_spec(tmp_path)
        written = run_sweep(spec)
        summary = json.loads(open(written["summary"]).read())
        assert summary["points_total"] == 3 and summary["points_failed"] == 0
        assert "delta_S2" in summary["residuals"]
        block = summary["residuals"]["delta_S2"]
        assert set(block) >= {"first", "last", "min", "max", "decreasing", "all_positive"}
        assert os.path.exists(written["figure"])

    def test_coeff_ratio_endpoints_hit_qm_bounds(self, tmp_path):
        base = minimal_config()
        base["packets"] = [
            {"name": "a_up", "center": 1, "width": 1.0, "species": 0},
            {"name": "a_dn", "center": 1, "width": 1.0, "species": 1},
            {"name": "b_up", "center": 4, "width": 1.0, "species": 0},
            {"name": "b_dn", "center": 4, "width": 1.0, "species": 1},
        ]
        base["state"]["terms"] = [
            {"coefficient": 1.0, "operators": ["a_up", "b_dn"]},
            {"coefficient": 1.0, "operators": ["a_dn", "b_up"]},
        ]
        base["output"] = {"directory": str(tmp_path / "coeff")}
        spec = validate_sweep({"base": base, "parameter": "coeff_ratio", "values": [0.0, 1.0]})
        written = run_sweep(spec)
        with open(written["csv"]) as fh:
            rows = list(csv.DictReader(fh))
        assert float(rows[0]["qm_S2"]) == pytest.approx(0.0, abs=1e-12)
        assert float(rows[1]["qm_S2"]) == pytest.approx(np.log(2), abs=1e-12)

    def test_partial_failure_keeps_good_rows(self, tmp_path):
        # the swapped-order fermionic recipe interferes to zero at equal
        # coefficients: a genuine runtime failure at one sweep point
        base = minimal_config()
        base["state"]["terms"] = [
            {"coefficient": 1.0, "operators": ["a", "b"]},
            {"coefficient": 1.0, "operators": ["b", "a"]},
        ]
        base["output"] = {"directory": str(tmp_path / "partial")}
        spec = validate_sweep(
            {"base": base, "parameter": "coeff_ratio", "values": [0.5, 1.0, 2.0]}
        )
        written = run_sweep(spec)
        with open(written["csv"]) as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["error"] == "" and rows[2]["error"] == ""
        assert "NumericalError" in rows[1]["error"]
        summary = json.loads(open(written["summary"]).read())
        assert summary["points_failed"] == 1

    def test_parallel_jobs_match_serial(self, tmp_path):
        spec = self.make_spec(tmp_path)
        serial = run_sweep(spec, out_dir=str(tmp_path / "s1"), jobs=1)
        parallel = run_sweep(spec, out_dir=str(tmp_path / "s2"), jobs=2)
        assert open(serial["csv"]).read() == open(parallel["csv"]).read()


class TestCLI:
    def test_validate_echoes_defaults(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        write_json(path, minimal_config())
        assert main(["validate", str(path)]) == 0
        echoed = json.loads(capsys.readouterr().out)
        assert echoed["model"]["boundary"] == "open"

    def test_run_and_exit_zero(self, tmp_path, capsys):
        raw = minimal_config()
        raw["output"] = {"directory": str(tmp_path / "cli-out"), "formats": ["json"]}
        path = tmp_path / "config.json"
        write_json(path, raw)
        assert main(["run", str(path)]) == 0
        assert os.path.exists(tmp_path / "cli-out" / "report.json")

    def test_sweep_command(self, tmp_path):
        base = minimal_config()
        base["output"] = {"directory": str(tmp_path / "cli-sweep"), "formats": ["csv", "json"]}
        path = tmp_path / "spec.json"
        write_json(path, {"base": base, "parameter": "separation", "values": [2, 3]})
        assert main(["sweep", str(path), "--jobs", "1"]) == 0
        assert os.path.exists(tmp_path / "cli-sweep" / "sweep.csv")

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        write_json(path, minimal_config(mass=1.0, hopping=1.0))
        assert main(["validate", str(path)]) == 2
        assert "gap" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["validate", str(tmp_path / "nope.json")]) == 2

    def test_numerical_error_exit_code(self, tmp_path, capsys):
        raw = minimal_config()
        raw["state"]["terms"] = [
            {"coefficient": 1.0, "operators": ["a", "b"]},
            {"coefficient": -1.0, "operators": ["a", "b"]},
        ]
        raw["output"] = {"directory": str(tmp_path / "x"), "formats": ["json"]}
        path = tmp_path / "config.json"
        write_json(path, raw)
        assert main(["run", str(path)]) == 3
        assert "zero norm" in capsys.readouterr().err
