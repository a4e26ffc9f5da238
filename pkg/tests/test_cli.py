import subprocess
import sys

import yaml

from distsimplex.cli import EXIT_ABORT, EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_ORACLE, main
from distsimplex.scenario import builtin_raw


def _write(tmp_path, raw, name="s.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(raw))
    return p


def test_run_writes_outputs(tmp_path, capsys):
    raw = builtin_raw("flocking")
    raw["duration"] = 2.0
    p = _write(tmp_path, raw)
    assert main(["run", str(p), "--out-dir", str(tmp_path / "out"), "--set", "seed=3"]) == EXIT_OK
    out = tmp_path / "out"
    assert (out / "trajectory.csv").exists() and (out / "summary.yaml").exists() and (out / "min_distance.csv").exists()
    doc = yaml.safe_load((out / "summary.yaml").read_text())
    assert doc["seed"] == 3 and doc["steps"] == 20
    assert "violation_count" in capsys.readouterr().out


def test_run_invalid_names_invariant(tmp_path, capsys):
    raw = builtin_raw("flocking")
    raw["limits"]["d_min"] = 5.0
    assert main(["run", str(_write(tmp_path, raw))]) == EXIT_INVALID
    assert "d_min < sense_radius" in capsys.readouterr().err


def test_run_missing_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.yaml")]) == EXIT_IO


def test_run_unwritable_output(tmp_path):
    raw = builtin_raw("flocking")
    raw["duration"] = 0.5
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(_write(tmp_path, raw)), "--out-dir", str(blocker / "sub"), "--quiet"]) == EXIT_IO


def test_run_nan_abort(tmp_path, capsys):
    raw = builtin_raw("waypoint")
    raw["dsa_enabled"] = False
    raw["init"]["positions"] = [[0, 0], [0, 0.5], [0, 1.0], [1e308, 1.5]]
    raw["init"]["velocities"] = [[0, 0], [0, 0], [0, 0], [1e308, 0]]
    raw["limits"]["v_max"] = 1e309
    code = main(["run", str(_write(tmp_path, raw)), "--out-dir", str(tmp_path), "--quiet"])
    # an infinite v_max is itself rejected at validation
    assert code == EXIT_INVALID
    raw["limits"]["v_max"] = 1e308
    code = main(["run", str(_write(tmp_path, raw)), "--out-dir", str(tmp_path), "--quiet"])
    assert code == EXIT_ABORT
    assert "aborted" in capsys.readouterr().err
    assert yaml.safe_load((tmp_path / "summary.yaml").read_text())["aborted"] is True


def test_validate(tmp_path, capsys):
    p = _write(tmp_path, builtin_raw("waypoint"))
    assert main(["validate", str(p)]) == EXIT_OK
    assert main(["validate", str(p), "--set", "cbf.m=1"]) == EXIT_INVALID


def test_demo_unknown_lists_names(capsys):
    assert main(["demo", "boids"]) == EXIT_INVALID
    assert "flocking, flocking-nodsa, waypoint" in capsys.readouterr().err


def test_demo_waypoint(tmp_path, capsys):
    assert main(["demo", "waypoint", "--out-dir", str(tmp_path)]) == EXIT_OK
    doc = yaml.safe_load(capsys.readouterr().out)
    assert doc["violation_count"] == 0 and doc["all_plans_completed"] is True


def test_oracle_commands(capsys):
    assert main(["oracle", "partition", "--samples", "500"]) == EXIT_OK
    assert "PASS partition" in capsys.readouterr().out
    assert main(["oracle", "nope"]) == EXIT_INVALID
    # the plain Euler oracle cannot meet its 1e-6 tolerance at 1000 substeps
    assert main(["oracle", "euler", "--samples", "5", "--quiet"]) == EXIT_ORACLE


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "distsimplex.cli", "demo", "nope"], capture_output=True, text=True)
    assert res.returncode == EXIT_INVALID and "valid names" in res.stderr
