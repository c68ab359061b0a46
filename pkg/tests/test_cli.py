import csv
import hashlib
import json
import math
from pathlib import Path

import pytest

from plumetrack.cli import main
from plumetrack.io import dumps_json, fmt_float

SMALL = {
    "workspace": {"nx": 30, "ny": 20, "h": 5.0, "origin": [0.0, 0.0]},
    "flow": {"v": [1.2247, 1.2247], "lambda": 4.9e-10},
    "source": {"position": [-22.5, -22.5], "rate": 2.5},
    "usv": {"start": [30.0, 30.0], "speed": 2.0},
    "sim": {"dt": 1.0, "warmup_s": 120.0, "max_updates": 400, "max_sim_time_s": 3600.0},
}


@pytest.fixture()
def small_file(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL))
    return path


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestRunCommand:
    def test_run_writes_artifacts_and_exits_zero(self, small_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", "--scenario", str(small_file), "--seed", "7", "--out", str(out)])
        assert code == 0
        for name in ("trajectory.csv", "uncertainty.csv", "belief_final.csv", "metrics.json"):
            assert (out / name).exists()
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["status"] == "succeeded"
        assert metrics["seed"] == 7
        assert metrics["error_m"] <= 10.0
        assert metrics["wall_time_s"] is None
        assert metrics["scenario_sha256"] == hashlib.sha256(small_file.read_bytes()).hexdigest()
        assert "wall_time" in capsys.readouterr().out

    def test_metrics_key_order(self, small_file, tmp_path):
        out = tmp_path / "out"
        main(["run", "--scenario", str(small_file), "--out", str(out)])
        keys = list(json.loads((out / "metrics.json").read_text()).keys())
        assert keys == [
            "status",
            "estimate_m",
            "error_m",
            "sci_m",
            "updates",
            "sim_time_s",
            "wall_time_s",
            "seed",
            "scenario_sha256",
        ]

    def test_deterministic_artifacts(self, small_file, tmp_path):
        hashes = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert main(["run", "--scenario", str(small_file), "--seed", "3", "--out", str(out)]) == 0
            hashes.append((_sha(out / "metrics.json"), _sha(out / "trajectory.csv")))
        assert hashes[0] == hashes[1]

    def test_trace_flag_writes_planner_trace(self, small_file, tmp_path):
        out = tmp_path / "out"
        main(["run", "--scenario", str(small_file), "--out", str(out), "--trace"])
        with (out / "planner_trace.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        assert set(rows[0]) == {"step", "cand_i", "cand_j", "p_hit", "ig", "selected"}
        by_step = {}
        for r in rows:
            by_step.setdefault(r["step"], []).append(r)
        for step_rows in by_step.values():
            assert sum(int(r["selected"]) for r in step_rows) == 1

    def test_aborted_run_exits_one(self, tmp_path):
        cfg = dict(SMALL)
        cfg["sim"] = {**SMALL["sim"], "max_updates": 0}
        path = tmp_path / "s.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "out"
        assert main(["run", "--scenario", str(path), "--out", str(out)]) == 1
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["status"] == "aborted"
        assert metrics["estimate_m"] == pytest.approx([0.0, 0.0], abs=1e-9)

    def test_csv_layouts(self, small_file, tmp_path):
        out = tmp_path / "out"
        main(["run", "--scenario", str(small_file), "--out", str(out)])
        traj = (out / "trajectory.csv").read_text()
        assert traj.startswith("time_s,x_m,y_m,concentration,z,waypoint_x_m,waypoint_y_m\n")
        assert "\r" not in traj
        unc = (out / "uncertainty.csv").read_text().splitlines()
        assert unc[0] == "step,time_s,width_x_m,width_y_m,est_x_m,est_y_m"
        with (out / "belief_final.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["i", "j", "x_m", "y_m", "probability"]
        assert len(rows) == 1 + 30 * 20
        # row-major: j outer, i inner
        assert [r[0] for r in rows[1:32]] == [str(i) for i in range(30)] + ["0"]
        assert rows[1][2] == fmt_float(-72.5) and rows[1][3] == fmt_float(-47.5)


class TestBatchCommand:
    def test_batch_metrics_and_aggregates(self, small_file, tmp_path):
        out = tmp_path / "batch"
        code = main(
            ["batch", "--scenario", str(small_file), "--trials", "3", "--seed", "5", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "metrics.json").read_text())
        assert [t["seed"] for t in payload["trials"]] == [5, 6, 7]
        agg = payload["aggregate"]
        assert agg["trials"] == 3
        succeeded = [t for t in payload["trials"] if t["status"] == "succeeded"]
        assert agg["succeeded"] == len(succeeded)
        assert agg["success_rate"] == pytest.approx(len(succeeded) / 3)
        if succeeded:
            mean_err = sum(t["error_m"] for t in succeeded) / len(succeeded)
            assert agg["mean_error_m"] == pytest.approx(mean_err, rel=1e-6)
        mean_sim = sum(t["sim_time_s"] for t in payload["trials"]) / 3
        assert agg["mean_sim_time_s"] == pytest.approx(mean_sim, rel=1e-6)
        for t in range(3):
            assert (out / f"trial_{t:03d}" / "metrics.json").exists()

    def test_batch_requires_positive_trials(self, small_file, tmp_path):
        assert main(["batch", "--scenario", str(small_file), "--trials", "0"]) == 2


class TestValidateCommand:
    def test_validate_ok(self, small_file):
        assert main(["validate", "--scenario", str(small_file)]) == 0

    def test_validate_broken_file_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**SMALL, "source": {"position": [999, 0], "rate": 1.0}}))
        assert main(["validate", "--scenario", str(path)]) == 2
        assert "source.position" in capsys.readouterr().err

    def test_validate_bundled_names(self):
        for name in ("scenario_a", "scenario_b", "scenario_upwind"):
            assert main(["validate", "--scenario", name]) == 0

    def test_unknown_scenario_exits_two(self):
        assert main(["validate", "--scenario", "no_such_scenario"]) == 2

    def test_usage_error_exits_two(self):
        assert main(["frobnicate"]) == 2


class TestFieldCommand:
    def test_field_snapshot(self, small_file, tmp_path):
        out = tmp_path / "snap.csv"
        assert main(["field", "--scenario", str(small_file), "--t", "60", "--out", str(out)]) == 0
        with out.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 600
        total = sum(float(r["concentration"]) for r in rows)
        # open boundaries may shed a little mass; most of 60 s of release remains
        assert 0 < total * 5.0**2 <= 2.5 * 60 + 1e-6


class TestJsonWriter:
    def test_nine_significant_digits(self):
        assert fmt_float(math.pi) == "3.14159265"
        assert fmt_float(120.0) == "120"
        assert fmt_float(4.9e-10) == "4.9e-10"

    def test_dumps_round_trips(self):
        obj = {
            "a": [1.5, None, True, False],
            "b": {"nested": "tex\"t", "n": 3},
            "c": [],
            "d": {},
        }
        assert json.loads(dumps_json(obj)) == {
            "a": [1.5, None, True, False],
            "b": {"nested": 'tex"t', "n": 3},
            "c": [],
            "d": {},
        }
