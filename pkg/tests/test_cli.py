import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from cpdiff.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(args + ["-o", str(out)])
    return code, out


def table(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# metadata: ")
    return json.loads(lines[0][12:]), list(csv.DictReader(lines[1:]))


def body(path):
    return path.read_text().split("\n", 1)[1]


def test_diffract_golden(tmp_path):
    code, out = run(["diffract", "--scheme", "fibonacci", "--weight", "gaussian",
                     "--floor", "1e-3"], tmp_path)
    assert code == 0
    meta, rows = table(out)
    assert abs(float(rows[0]["intensity"]) - 0.2) <= 1e-12
    assert rows[0]["k0"] == "0" or float(rows[0]["k0"]) == 0.0
    for r in rows:
        expected = 0.2 * math.exp(-2 * math.pi * float(r["kstar0"]) ** 2)
        assert abs(float(r["intensity"]) - expected) <= 1e-10
    assert body(out) == body(GOLDEN / "diffract_fibonacci_gaussian.csv")
    assert meta["config"]["floor"] == 1e-3 and "version" in meta and "backend" in meta


def test_modelset_golden(tmp_path):
    code, out = run(["modelset", "--r", "5"], tmp_path)
    assert code == 0
    assert body(out) == body(GOLDEN / "modelset_fibonacci_r5.csv")


def test_density(tmp_path):
    code, out = run(["density", "--scheme", "fibonacci",
                     "--window", "interval:-1:0.618034:open-closed", "--r", "10000"], tmp_path)
    assert code == 0
    _, rows = table(out)
    assert float(rows[0]["empirical"]) == pytest.approx(0.7236068, rel=0.01)


def test_missing_seed(tmp_path, capsys):
    code, _ = run(["randomtile", "--N", "10"], tmp_path)
    assert code == 2
    assert "seed" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["density", "--r", "-3"],
    ["density", "--window", "interval:2:1"],
    ["weyl", "--weight", "lorentzian"],
    ["fourier-bohr"],
    ["autocorr", "--z", "1.5,0"],
    ["randomtile", "--seed", "1", "--p-u", "1.2"],
    ["diffract", "--weight", "gaussian", "--weight-param", "width"],
])
def test_validation_errors(tmp_path, args):
    assert run(args, tmp_path)[0] == 2


def test_resource_cap(tmp_path):
    assert run(["modelset", "--r", "9e6", "--window", "ball:0:1e6"], tmp_path)[0] == 3


def test_failed_check_exit_code(tmp_path):
    # a tolerance no truncation can certify
    assert run(["poisson-check", "--tol", "1e-300"], tmp_path)[0] == 4


def test_all_commands_emit_bounds(tmp_path):
    cases = {
        "weyl": ["--r", "500"],
        "fourier-bohr": ["--k-dual", "1,1", "--r", "500"],
        "autocorr": ["--z", "1,0", "--n", "300"],
        "poisson-check": [],
    }
    for cmd, extra in cases.items():
        code, out = run([cmd] + extra, tmp_path, f"{cmd}.csv")
        assert code == 0
        _, rows = table(out)
        assert any("bound" in k for k in rows[0])


def test_fourier_bohr_off_module(tmp_path):
    code, out = run(["fourier-bohr", "--k", str(1 / math.e), "--r", "300"], tmp_path)
    assert code == 0
    _, rows = table(out)
    assert float(rows[0]["limit_re"]) == 0.0


def test_json_output(tmp_path):
    code, out = run(["scheme-info", "--format", "json"], tmp_path, "s.json")
    data = json.loads(out.read_text())
    assert code == 0 and data["columns"] == ["quantity", "value"]
    assert data["summary"]["scheme"]["name"] == "fibonacci"


def test_custom_scheme_file(tmp_path):
    path = tmp_path / "lat.json"
    path.write_text(json.dumps({"name": "mine", "d": 1, "m": 1,
                                "basis": ["1", "1.4142135623730951", "1", "-1.4142135623730951"],
                                "certified": False}))
    code, out = run(["density", "--scheme", str(path), "--window", "interval:-0.5:0.5",
                     "--r", "2000"], tmp_path)
    assert code == 0
    _, rows = table(out)
    assert float(rows[0]["empirical"]) == pytest.approx(1 / (2 * math.sqrt(2)), rel=0.02)


def test_randomtile_outputs(tmp_path):
    code, out = run(["randomtile", "--M", "300", "--N", "200", "--seed", "4", "--bins", "60",
                     "--width-fit", "50,200,800"], tmp_path)
    assert code == 0
    meta, rows = table(out)
    assert list(rows[0]) == ["bin_center", "empirical_density", "profile_value"]
    assert len(rows) == 60
    summary = json.loads(Path(str(out) + ".summary.json").read_text())["summary"]
    assert summary["l1_distance"] < 0.2
    assert 0.3 < summary["width_fit"]["exponent"] < 0.7


def test_replay_bit_identical(tmp_path):
    code, first = run(["randomtile", "--M", "400", "--N", "300", "--seed", "12",
                       "--threads", "3"], tmp_path, "a.csv")
    assert code == 0
    code, second = run(["--config", str(first)], tmp_path, "b.csv")
    assert code == 0
    assert first.read_bytes() == second.read_bytes()


def test_replay_from_json_and_plain_config(tmp_path):
    code, first = run(["weyl", "--r", "800", "--a", "3.5", "--format", "json"], tmp_path, "a.json")
    code2, second = run(["--config", str(first)], tmp_path, "b.json")
    assert code == code2 == 0 and first.read_bytes() == second.read_bytes()
    plain = tmp_path / "cfg.json"
    plain.write_text(json.dumps({"command": "weyl", "r": 800.0, "a": 3.5, "format": "json"}))
    code3, third = run(["--config", str(plain)], tmp_path, "c.json")
    assert code3 == 0 and first.read_bytes() == third.read_bytes()


def test_bad_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "weyl", "bogus": 1}))
    assert run(["--config", str(cfg)], tmp_path)[0] == 2
    assert run(["--config", str(tmp_path / "missing.json")], tmp_path)[0] == 2


def test_threads_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("CPDIFF_THREADS", "2")
    code, out = run(["randomtile", "--M", "50", "--N", "20", "--seed", "1"], tmp_path)
    meta, _ = table(out)
    assert code == 0 and meta["config"]["threads"] == 2


def test_console_script_stdout_is_clean():
    proc = subprocess.run([sys.executable, "-m", "cpdiff.cli", "randomtile", "--M", "20",
                           "--N", "10", "--seed", "0", "--bins", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# metadata: ")
    assert "sampling" in proc.stderr
