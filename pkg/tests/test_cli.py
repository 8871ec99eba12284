import csv
import json

import pytest

from rhs_lab.cli import main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_one_point(tmp_path):
    assert main(["run", "--scenario", "one_point", "--r", "2", "--output", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    assert rows[0] == ["t", "Q_1", "P_1", "u_1", "E", "c_spread", "max_abs_slope"]
    assert rows[1][:2] == ["0", "0.10000000000000001"]
    assert rows[1][3] == "0.10000000000000001"
    raw = (tmp_path / "trajectory.csv").read_bytes()
    assert b"\r" not in raw
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["termination"] == "blowup" and summary["r"] == 2
    assert summary["energy_drift_slope_le_100"] < 1e-6
    assert {"solves", "steps", "cold_restarts"} <= set(summary["solver"])


def test_run_asymmetric_data(tmp_path):
    assert main(["run", "--scenario", "asymmetric", "--r", "4", "--output", str(tmp_path)]) == 0
    head, first = read_csv(tmp_path / "trajectory.csv")[:2]
    row = dict(zip(head, first))
    assert (row["Q_1"], row["Q_2"]) == ("0.10000000000000001", "0.20000000000000001")
    assert (row["u_1"], row["u_2"]) == ("0.20000000000000001", "-0.125")


def test_deterministic_output(tmp_path):
    for name in ("a", "b"):
        assert main(["run", "--scenario", "chasing", "--r", "4", "--t-end", "0.5", "--output",
                     str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_sine_snapshots_skip_past_termination(tmp_path, capsys):
    code = main(["run", "--scenario", "smooth_sine", "--r", "4", "--snapshots", "0,0.3,2.67",
                 "--output", str(tmp_path)])
    assert code == 0
    assert "snapshot at t=2.67 skipped" in capsys.readouterr().err
    snap = read_csv(tmp_path / "snapshot_t0.3.csv")
    assert snap[0] == ["x", "u"] and len(snap) == 1002
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["skipped_snapshots"] == [2.67]
    assert [s["time"] for s in summary["snapshots"]] == pytest.approx([0.0, 0.3])
    zero = read_csv(tmp_path / "snapshot_t0.csv")
    assert float(zero[251][1]) == pytest.approx(1.0)  # sin(2 pi x) at the node x = 0.25


def test_json_format(tmp_path):
    assert main(["run", "--scenario", "symmetric", "--r", "2", "--t-end", "0.1", "--format", "json",
                 "--output", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "trajectory.json").read_text())
    assert data["Q_2"][0] == 0.9 and len(data["t"]) == 11


def test_config_and_override(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nscenario = chasing\nr = 4\nt-end = 0.2\nrecord_every = 50\n")
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--output", str(out)]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert (s["scenario"], s["r"], s["t_end"], s["record_every"]) == ("chasing", 4, 0.2, 50)
    assert main(["run", "--config", str(cfg), "--r", "2", "--output", str(out)]) == 0
    assert json.loads((out / "summary.json").read_text())["r"] == 2


def test_bad_config(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\ncolour = blue\n")
    assert main(["run", "--config", str(cfg), "--output", str(tmp_path)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.ini")]) == 2


def test_expect_completion(tmp_path):
    args = ["run", "--scenario", "asymmetric", "--r", "2", "--output", str(tmp_path)]
    assert main(args) == 0
    assert main(args + ["--expect-completion"]) == 3


@pytest.mark.parametrize("args", [
    ["run", "--scenario", "nope"],
    ["run", "--r", "3"],
    ["run", "--dt", "0"],
    ["run", "--snapshots", "a,b"],
    ["run", "--scenario", "custom", "--u0", "__import__('os')"],
    ["sweep", "--r", ""],
    ["check", "nope"],
])
def test_usage_errors(args, tmp_path):
    assert main(args + (["--output", str(tmp_path)] if args[0] != "check" else [])) == 2


def test_argparse_errors():
    with pytest.raises(SystemExit) as info:
        main(["run", "--format", "xml"])
    assert info.value.code == 2


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--t-end", "0.01", "--output", str(blocker / "sub")]) == 1


def test_sweep_one_point(tmp_path):
    assert main(["sweep", "--scenario", "one_point", "--r", "2,4", "--t-end", "12", "--output", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "aggregate.csv")
    assert rows[0] == ["r", "status", "blew_up", "blowup_time", "max_drift", "z", "inf_deviation"]
    assert [r[0] for r in rows[1:]] == ["2", "4"]
    assert float(rows[1][3]) < float(rows[2][3])
    assert (tmp_path / "r_04" / "trajectory.csv").exists()


def test_sweep_rest_is_non_blowup(tmp_path, monkeypatch):
    monkeypatch.setenv("RHS_LAB_THREADS", "1")
    assert main(["sweep", "--scenario", "custom", "--pairs", "0.3:0,0.6:0", "--t-end", "0.5", "--r", "2,4",
                 "--output", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "aggregate.csv")
    assert all(r[2] == "0" and r[3] == "nan" for r in rows[1:])


def test_sweep_expect_completion_failure(tmp_path):
    assert main(["sweep", "--scenario", "asymmetric", "--r", "2", "--expect-completion",
                 "--output", str(tmp_path)]) == 3


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RHS_LAB_THREADS", "x")
    assert main(["sweep", "--r", "2", "--t-end", "0.1", "--output", str(tmp_path)]) == 2


def test_check_r2(tmp_path, capsys):
    assert main(["check", "r2_equiv", "--output", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "pass"
    assert report["checks"][0]["value"] <= 1e-13
    assert (tmp_path / "check_r2_equiv.json").exists()


def test_check_oracle(capsys):
    assert main(["check", "oracle"]) == 0
    assert json.loads(capsys.readouterr().out)["checks"][0]["value"] <= 1e-6
