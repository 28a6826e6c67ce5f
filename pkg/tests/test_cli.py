import json
from pathlib import Path

from evysc.cli import main

CONFIG = str(Path(__file__).resolve().parent.parent / "configs" / "default.cfg")


def test_simulate_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["simulate", "--config", CONFIG, "--maneuver", "dlc",
               "--speed-kph", "80", "--mu", "1.0", "--ysc", "on",
               "--duration", "2", "--out", str(out)])
    assert rc == 0
    assert (out / "log.csv").exists()
    assert (out / "metrics.json").exists()
    assert (out / "plot.svg").exists()
    report = json.loads((out / "metrics.json").read_text())
    assert "rms_yaw_rate_error" in report


def test_simulate_rejects_zero_speed(tmp_path, capsys):
    rc = main(["simulate", "--config", CONFIG, "--speed-kph", "0",
               "--out", str(tmp_path / "x")])
    assert rc != 0
    assert "speed > 1 m/s required" in capsys.readouterr().err


def test_simulate_missing_config(tmp_path, capsys):
    rc = main(["simulate", "--config", str(tmp_path / "nope.cfg"),
               "--out", str(tmp_path / "x")])
    assert rc != 0
    assert "error:" in capsys.readouterr().err


def test_simulate_byte_identical_logs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        rc = main(["simulate", "--config", CONFIG, "--duration", "1.5",
                   "--out", str(out)])
        assert rc == 0
    assert (out1 / "log.csv").read_bytes() == (out2 / "log.csv").read_bytes()


def test_compare_ysc_pair(tmp_path):
    out = tmp_path / "cmp"
    rc = main(["compare", "--config", CONFIG, "--compare", "ysc",
               "--duration", "2", "--out", str(out)])
    assert rc == 0
    assert (out / "log_ysc_on.csv").exists()
    assert (out / "log_ysc_off.csv").exists()
    report = json.loads((out / "metrics.json").read_text())
    assert {"ysc_on", "ysc_off", "delta", "ratio"} <= set(report)
    assert report["ratio"]["rms_yaw_rate_error"] > 0.0


def test_compare_plant_pair_reports_model_discrepancy(tmp_path):
    """Below 0.4 g the reported cross-model yaw-rate discrepancy is <= 10 %."""
    from evysc.logio import parse_log_csv
    out = tmp_path / "cmp2"
    rc = main(["compare", "--config", CONFIG, "--compare", "plant",
               "--maneuver", "sine", "--duration", "4", "--ysc", "off",
               "--speed-kph", "54", "--out", str(out)])
    assert rc == 0
    data = parse_log_csv(out / "log_double.csv")
    assert max(abs(a) for a in data["a_y"]) <= 0.4 * 9.81
    report = json.loads((out / "metrics.json").read_text())
    assert {"single", "double"} <= set(report)
    assert report["yaw_rate_rms_discrepancy"] <= 0.10


def test_gains_to_stdout(capsys):
    rc = main(["gains", "--config", CONFIG])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "speed_mps,k_beta,k_r,pole1_re,pole2_re"
    assert len(lines) == 9  # 8 grid speeds
    for line in lines[1:]:
        cells = [float(v) for v in line.split(",")]
        assert cells[3] < 0.0 and cells[4] < 0.0  # closed-loop poles stable


def test_gains_speed_override(tmp_path):
    out = tmp_path / "gains.csv"
    rc = main(["gains", "--config", CONFIG, "--speeds", "20", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2  # header + one row
    assert float(lines[1].split(",")[0]) == 20.0


def test_gains_empty_grid_fails(capsys):
    rc = main(["gains", "--config", CONFIG, "--speeds", ""])
    assert rc != 0
    assert "empty" in capsys.readouterr().err
