import csv
import json
import subprocess
import sys

import pytest

from competition_lab.cli import main


def _read(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_hydro_stationary(tmp_path, capsys):
    assert main(["hydro", "--lambda", "0.5", "--rho", "0.5", "--out-dir", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "theta=180" in text and "regime=stationary" in text and "tan_alpha=1" in text
    rows = _read(tmp_path / "shape.csv")
    assert rows[0] == ["r", "x", "y", "u"] and len(rows) == 202
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["command"] == "hydro" and summary["passed"] is True
    assert summary["config"]["lambda"] == 0.5


def test_hydro_rarefaction_quantiles(tmp_path, capsys):
    assert main(["hydro", "--lambda", "0.8", "--rho", "0.2", "--grid", "11", "--out-dir", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "regime=rarefaction" in text and "tan_alpha_q0.5=1\n" in text


@pytest.mark.parametrize("argv", [
    ["hydro", "--lambda", "1.5", "--rho", "0.2"],
    ["hydro", "--lambda", "0.5", "--rho", "1.0"],
    ["tasep", "--replicas", "0"],
    ["profile", "--bin-width", "0.9"],
    ["nosuch"],
    ["hydro", "--bogus", "1"],
])
def test_bad_input_exits_2(tmp_path, argv, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)] if argv[0] != "nosuch" else argv) == 2
    assert "ERROR" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"lambda": 0.3, "rho": 0.6, "out_dir": str(tmp_path / "o")}))
    assert main(["hydro", "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["config"]["rho"] == 0.6
    cfg.write_text(json.dumps({"lambda": 0.3, "colour": "red"}))
    assert main(["hydro", "--config", str(cfg)]) == 2
    assert "colour" in capsys.readouterr().err
    assert main(["hydro", "--config", str(tmp_path / "missing.json")]) == 2


def test_grow_outputs(tmp_path):
    assert main(["grow", "--box", "20", "--seed", "4", "--out-dir", str(tmp_path)]) == 0
    assert _read(tmp_path / "passage.csv")[0] == ["x", "y", "G"]
    assert _read(tmp_path / "labels.csv")[0] == ["x", "y", "sigma"]
    phi = _read(tmp_path / "phi.csv")
    assert phi[0] == ["n", "x", "y", "G"] and phi[1][:3] == ["0", "1", "1"]


def test_couple_passes(tmp_path):
    rc = main(["couple", "--lambda", "0.8", "--rho", "0.2", "--t-max", "100", "--replicas", "3",
               "--box", "30", "--seed", "7", "--workers", "1", "--out-dir", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] and all(summary["criteria"].values())
    rows = _read(tmp_path / "couple.csv")
    assert rows[0][:3] == ["replica", "seed", "events"] and len(rows) == 4


def test_rerun_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["tasep", "--lambda", "0.8", "--rho", "0.2", "--t-max", "100", "--replicas", "4",
                     "--observe-at", "50,100", "--workers", "1" if name == "a" else "2",
                     "--out-dir", str(tmp_path / name)]) == 0
    a = (tmp_path / "a" / "speed.csv").read_bytes()
    assert a == (tmp_path / "b" / "speed.csv").read_bytes()
    assert a.splitlines()[0] == b"replica,seed,t,X,I,J,speed"
    sa = json.loads((tmp_path / "a" / "summary.json").read_text())
    sb = json.loads((tmp_path / "b" / "summary.json").read_text())
    for s in (sa, sb):
        s.pop("wall_clock_seconds")
        s["config"].pop("workers")
        s["config"].pop("out_dir")
    assert sa == sb


def test_compete_and_fluct(tmp_path):
    assert main(["compete", "--lambda", "0.2", "--rho", "0.8", "--steps", "100", "--replicas", "5",
                 "--workers", "1", "--out-dir", str(tmp_path / "c")]) == 0
    assert _read(tmp_path / "c" / "inclination.csv")[0] == ["replica", "seed", "I", "J", "tan_alpha"]
    assert main(["fluct", "--replicas", "10", "--observe-at", "10,20,40", "--transversal", "--workers", "1",
                 "--out-dir", str(tmp_path / "f")]) == 0
    rows = _read(tmp_path / "f" / "fluct.csv")
    assert rows[0] == ["observable", "t", "mean", "variance"] and len(rows) == 7
    assert main(["fluct", "--observe-at", "10,20", "--out-dir", str(tmp_path / "g")]) == 2


def test_profile_command(tmp_path):
    assert main(["profile", "--t-max", "100", "--replicas", "3", "--bin-width", "0.1", "--workers", "1",
                 "--out-dir", str(tmp_path)]) == 0
    assert _read(tmp_path / "profile.csv")[0] == ["r", "density", "sites", "u"]


def test_verify_subset(tmp_path):
    assert main(["verify", "--criteria", "A12", "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "acceptance.json").read_text())
    assert [c["id"] for c in doc["criteria"]] == ["A12"] and doc["criteria"][0]["passed"]
    assert main(["verify", "--criteria", "A99", "--out-dir", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "competition_lab", "hydro", "--out-dir", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "regime=stationary" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "competition_lab", "hydro", "--lambda", "2"],
                         capture_output=True, text=True, cwd=tmp_path)
    assert bad.returncode == 2
