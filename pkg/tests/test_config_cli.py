"""Configuration schema, CLI subcommands, exit codes, output files."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from risloc.cli import main
from risloc.config import (CONFIG_SCHEMA, default_config, load_config,
                           validate_config)
from risloc.errors import ConfigError


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfigSchema:
    def test_defaults_fill_everything(self):
        doc = default_config()
        assert doc["ris"]["num_columns"] == 16
        assert doc["code"]["bit_duration_s"] == pytest.approx(1.87e-3)
        assert doc["receiver"]["exclude_orders"] == [0]
        assert doc["channel"]["snr_db"] is None

    def test_partial_document_keeps_overrides(self):
        doc = validate_config({"ris": {"num_columns": 8, "num_rows": 8}})
        assert doc["ris"]["num_columns"] == 8
        assert doc["ris"]["carrier_frequency_hz"] == pytest.approx(5.385e9)

    def test_invalid_spacing_rejected(self):
        with pytest.raises(ConfigError, match="spacing"):
            validate_config({"ris": {"spacing_wavelengths": -0.5}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({"ris": {"columns": 16}})

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({"scenario": {"name": "warp"}})

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/config.json")

    def test_schema_is_plain_json(self):
        json.dumps(CONFIG_SCHEMA)  # must not contain non-serializable parts


class TestPatternCommand:
    def test_writes_csv_and_sidecar(self, tmp_path, capsys):
        rc = main(["pattern", "--out", str(tmp_path / "out")])
        assert rc == 0
        rows = read_csv(tmp_path / "out" / "pattern.csv")
        assert rows[0] == ["angle_deg"] + [f"h{n}" for n in range(-8, 9)]
        assert len(rows) == 1 + 1801
        sidecar = json.loads((tmp_path / "out" / "pattern.json").read_text())
        assert sidecar["code_length"] == 16
        assert sidecar["peak_angles_deg"]["4"] == pytest.approx(30.0, abs=0.1)
        table = capsys.readouterr().out
        assert "7.18" in table and "30.00" in table

    def test_eight_column_library(self, tmp_path):
        cfg = write_config(tmp_path, {"ris": {"num_columns": 8, "num_rows": 8}})
        rc = main(["pattern", "--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 0
        rows = read_csv(tmp_path / "out" / "pattern.csv")
        assert rows[0] == ["angle_deg"] + [f"h{n}" for n in range(-4, 5)]

    def test_invalid_spacing_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"ris": {"spacing_wavelengths": -1.0}})
        rc = main(["pattern", "--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "config"


class TestSimulateCommand:
    def test_dominant_line_matches_geometry(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"simulate": {"rx_angle_deg": 22.0}})
        rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 0
        assert "strongest non-zero harmonic line: +3" in capsys.readouterr().out
        waveform = read_csv(tmp_path / "out" / "waveform.csv")
        assert waveform[0] == ["t", "re", "im"]
        harmonics = read_csv(tmp_path / "out" / "harmonics.csv")
        mags = {int(r[0]): float(r[2]) for r in harmonics[1:]}
        assert max((n for n in mags if n != 0), key=mags.get) == 3

    def test_spectrum_comb_survives_noise(self, tmp_path):
        # 8-period windows at 50% overlap over 68 periods: 16 windows
        cfg = write_config(tmp_path, {
            "simulate": {"rx_angle_deg": 22.0, "duration_periods": 68},
            "channel": {"snr_db": -5.0, "seed": 3},
            "receiver": {"window_periods": 8, "overlap_fraction": 0.5},
        })
        rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 0
        harmonics = read_csv(tmp_path / "out" / "harmonics.csv")
        mags = {int(r[0]): float(r[2]) for r in harmonics[1:]}
        spectrum = read_csv(tmp_path / "out" / "spectrum.csv")
        floor = np.median([float(r[1]) for r in spectrum[1:]])
        assert mags[3] > 4 * floor  # comb clearly visible after averaging

    def test_duration_precondition_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"simulate": {"duration_periods": 1.0}})
        rc = main(["simulate", "--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "DurationError"


class TestEstimateCommand:
    def test_estimate_from_waveform_file(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, {
            "simulate": {"rx_angle_deg": -14.0},
            "receiver": {"exclude_orders": []},
        })
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        rc = main(["estimate", str(out / "waveform.csv"), "--config", cfg,
                   "--sidecar", str(out / "waveform.json"),
                   "--out", str(out)])
        assert rc == 0
        est = json.loads((out / "estimate.json").read_text())
        assert est["angle_deg"] == pytest.approx(-14.0, abs=3.75)
        assert est["excluded_orders"] == []
        assert len(est["profile"]) == 1801
        assert est["f0_used"] == pytest.approx(1 / (16 * 1.87e-3), rel=1e-9)


class TestSweepCommand:
    def test_noiseless_sweep_within_partition(self, tmp_path):
        cfg = write_config(tmp_path, {
            "sweep": {"angle_start_deg": -75, "angle_stop_deg": 75,
                      "angle_step_deg": 15, "num_seeds": 1},
            "receiver": {"exclude_orders": []},
        })
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        rows = read_csv(out / "sweep.csv")
        assert rows[0] == ["true_deg", "est_deg", "err_deg", "seed"]
        errs = [float(r[2]) for r in rows[1:]]
        assert max(abs(e) for e in errs) <= 3.75
        summary = json.loads((out / "summary.json").read_text())
        assert summary["num_points"] == 11
        assert summary["fraction_within_5deg"] == 1.0

    def test_empty_axis_is_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "sweep": {"angle_start_deg": 10, "angle_stop_deg": 5}})
        rc = main(["sweep", "--config", cfg, "--out", str(tmp_path / "out")])
        assert rc == 2

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, {
            "sweep": {"angle_start_deg": -10, "angle_stop_deg": 10,
                      "angle_step_deg": 10, "num_seeds": 2},
            "channel": {"snr_db": 5.0},
        })
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        first = (out / "sweep.csv").read_bytes(), (out / "summary.json").read_bytes()
        assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        second = (out / "sweep.csv").read_bytes(), (out / "summary.json").read_bytes()
        assert first == second

    def test_worker_pool_matches_serial(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, {
            "sweep": {"angle_start_deg": -20, "angle_stop_deg": 20,
                      "angle_step_deg": 10, "num_seeds": 2},
            "channel": {"snr_db": 10.0},
        })
        out1, out2 = tmp_path / "serial", tmp_path / "parallel"
        monkeypatch.setenv("RISLOC_WORKERS", "1")
        assert main(["sweep", "--config", cfg, "--out", str(out1)]) == 0
        monkeypatch.setenv("RISLOC_WORKERS", "3")
        assert main(["sweep", "--config", cfg, "--out", str(out2)]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()


class TestScenarioCommand:
    def test_two_surface_fix_report(self, tmp_path):
        cfg = write_config(tmp_path, {
            "scenario": {
                "name": "multi_ris_fix",
                "poses": [
                    {"position_m": [0, 0], "boresight_deg": 90.0},
                    {"position_m": [10, 0], "boresight_deg": 90.0},
                ],
                "user_position_m": [5.0, 5.0],
            },
            "receiver": {"exclude_orders": []},
        })
        out = tmp_path / "out"
        assert main(["scenario", "--config", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "scenario.json").read_text())
        assert report["position_fix"]["position_error_m"] < 1.5
        rows = read_csv(out / "scenario.csv")
        assert rows[0][0] == "record"
        assert any(r[0] == "fix" for r in rows[1:])

    def test_user_side_report(self, tmp_path):
        cfg = write_config(tmp_path, {
            "scenario": {"name": "user_side",
                         "poses": [{"position_m": [0, 0], "boresight_deg": 90.0}],
                         "user_position_m": [3.0, 4.0]},
            "receiver": {"exclude_orders": []},
        })
        out = tmp_path / "out"
        assert main(["scenario", "--config", cfg, "--out", str(out)]) == 0
        report = json.loads((out / "scenario.json").read_text())
        surf = report["per_surface"][0]
        assert abs(surf["aoa_error_deg"]) <= 3.75

    def test_unknown_scenario_usage_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"scenario": {"name": "hyperspace"}})
        rc = main(["scenario", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == 2


class TestCliEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "risloc.cli", "pattern",
             "--out", str(tmp_path / "out")],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert (tmp_path / "out" / "pattern.csv").exists()

    def test_error_json_on_stderr(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        proc = subprocess.run(
            [sys.executable, "-m", "risloc.cli", "pattern",
             "--config", str(bad), "--out", str(tmp_path / "out")],
            capture_output=True, text=True)
        assert proc.returncode == 2
        payload = json.loads(proc.stderr.strip().splitlines()[-1])
        assert payload["error"] == "config"
