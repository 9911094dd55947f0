import csv
import json
import math
import re
import subprocess
import sys

import pytest

from servoctl.cli import main
from servoctl.config import default_config_dict, parse_config

FAST = ["--dt", "1e-3", "--t-final", "1.0"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def test_model(capsys):
    code, out, _ = run(capsys, "model")
    assert code == 0
    assert "den: [0.00077, 0.05392, 1.441, 0]" in out
    assert "num: [1.2]" in out
    assert "-35.01 + 25.42i" in out and "-35.01 - 25.42i" in out


def test_tune(capsys):
    code, out, _ = run(capsys, "tune")
    assert code == 0
    k_cr = float(re.search(r"K_cr\s+=\s+(\S+)", out).group(1))
    assert k_cr == pytest.approx(84.0988, rel=1e-5)
    row = re.search(r"^PID\s+(\S+)\s+(\S+)\s+(\S+)", out, re.M).groups()
    assert float(row[0]) == pytest.approx(0.6 * k_cr, rel=1e-5)
    assert re.search(r"^P\s+\S+\s+inf", out, re.M)


def test_design(capsys):
    code, out, _ = run(capsys, "design")
    assert code == 0
    assert "K_c = [17.81, 0.6596, 0.5242]" in out
    assert "analytic SSE = 0.9438" in out
    assert "analytic SSE = 0.0000" in out


def test_design_without_state_feedback(capsys, tmp_path):
    cfg = write_json(tmp_path / "c.json", {"controllers": [{"kind": "P", "tuning": "zn"}]})
    code, _, err = run(capsys, "design", "--config", cfg)
    assert code == 2 and json.loads(err)["error"] == "ConfigError"


def test_simulate_csv(capsys, tmp_path):
    out_dir = tmp_path / "sim"
    code, out, _ = run(capsys, "simulate", "--out", str(out_dir), "--dt", "1e-3", "--t-final", "0.5")
    assert code == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["P.csv", "PI.csv", "PID.csv", "SFC.csv", "SFCIA.csv"]
    with open(out_dir / "P.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "r", "u", "y"]
    assert len(rows) - 1 == math.floor(0.5 / 1e-3) + 1
    assert float(rows[1][2]) == pytest.approx(42.0494, rel=1e-5)  # u(0) = kp * r
    assert float(rows[-1][0]) == pytest.approx(0.5)
    with open(out_dir / "PID.csv", newline="") as fh:
        pid = list(csv.reader(fh))
    assert all(r[2] == "" for r in pid[1:])
    assert b"\r\n" not in (out_dir / "SFC.csv").read_bytes()


def test_compare_outputs(capsys, tmp_path):
    out_dir = tmp_path / "cmp"
    code, out, _ = run(capsys, "compare", "--out", str(out_dir), "--svg", *FAST)
    assert code == 0
    assert "Maximum overshoot (%)" in out and "Peak time (sec)" in out
    metrics = json.loads((out_dir / "metrics.json").read_text())
    assert set(metrics) == {"P", "PI", "PID", "SFC", "SFCIA"}
    assert metrics["SFCIA"]["sse"] < 1e-3
    assert (out_dir / "report.txt").read_text() in out
    svg = (out_dir / "comparison.svg").read_text()
    assert 'viewBox="0 0 900 600"' in svg
    assert len(re.findall(r'<polyline id="trace-\d+"', svg)) == 5
    assert svg.count("<polyline") == 6  # plus the reference


def test_compare_deterministic(capsys, tmp_path):
    for d in ("a", "b"):
        assert main(["compare", "--out", str(tmp_path / d), "--svg", *FAST]) == 0
    capsys.readouterr()
    for name in ("P.csv", "SFCIA.csv", "report.txt", "metrics.json", "comparison.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_init_round_trip(capsys, tmp_path):
    code, out, _ = run(capsys, "init")
    assert code == 0
    data = json.loads(out)
    assert data == default_config_dict()
    cfg = parse_config(data)
    assert [c.kind for c in cfg.controllers] == ["P", "PI", "PID", "SFC", "SFCIA"]
    path = tmp_path / "init.json"
    path.write_text(out)
    assert main(["tune", "--config", str(path)]) == 0


@pytest.mark.parametrize(
    "cfg,needle",
    [
        ({"motor": {"b": -1}}, "motor.b"),
        ({"motor": {"Q": 1}}, "unknown key"),
        ({"sim": {"dt": 0}}, "sim"),
        ({"controllers": [{"kind": "LQR"}]}, "kind"),
        ({"controllers": [{"kind": "PI", "kp": 1.0}]}, "need all"),
        ({"controllers": [{"kind": "P"}, {"kind": "P"}]}, "duplicate"),
        ({"motor": {}, "plant": {"num": [1], "den": [1, 1]}}, "mutually exclusive"),
    ],
)
def test_config_errors(capsys, tmp_path, cfg, needle):
    code, _, err = run(capsys, "model", "--config", write_json(tmp_path / "c.json", cfg))
    assert code == 2
    payload = json.loads(err)
    assert payload["error"] == "ConfigError" and needle in payload["message"]


def test_json_syntax_error_location(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "motor": {"R": 2.45,}\n}\n')
    code, _, err = run(capsys, "model", "--config", str(path))
    assert code == 2
    assert re.search(r"bad\.json:2:\d+: invalid JSON", json.loads(err)["message"])


def test_missing_config_file(capsys, tmp_path):
    code, _, err = run(capsys, "model", "--config", str(tmp_path / "nope.json"))
    assert code == 2 and "nope.json" in json.loads(err)["message"]


def test_uncontrollable_plant(capsys, tmp_path):
    cfg = {
        "plant": {"A": [[-1, 0], [0, -1]], "B": [[1], [1]], "C": [[1, 0]]},
        "controllers": [{"kind": "SFC", "poles": [-2, -3]}],
    }
    code, _, err = run(capsys, "design", "--config", write_json(tmp_path / "c.json", cfg))
    assert code == 3 and json.loads(err)["error"] == "Uncontrollable"


def test_unconjugated_poles(capsys, tmp_path):
    cfg = {"controllers": [{"kind": "SFC", "poles": [[-10, 5], -20, -30]}]}
    code, _, err = run(capsys, "design", "--config", write_json(tmp_path / "c.json", cfg))
    assert code == 3 and json.loads(err)["error"] == "InvalidPoleSet"


def test_unstable_explicit_gains(capsys, tmp_path):
    cfg = {"controllers": [{"kind": "SFC", "gains": [-10, 0, 0]}]}
    code, _, err = run(capsys, "simulate", "--config", write_json(tmp_path / "c.json", cfg), "--out", str(tmp_path))
    assert code == 3 and json.loads(err)["error"] == "UnstableDesign"


def test_no_critical_gain(capsys, tmp_path):
    cfg = {"plant": {"num": [1], "den": [1, 1]}, "controllers": [{"kind": "P", "tuning": "zn"}]}
    code, _, err = run(capsys, "tune", "--config", write_json(tmp_path / "c.json", cfg))
    assert code == 4 and json.loads(err)["error"] == "NoCriticalGain"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "servoctl", "tune"], capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0 and "K_cr" in proc.stdout


def test_unknown_command(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
