import json

import pytest

from torusflow.cli import main

SMALL = "grid.N = 64\nphysics.epsilon = 0.08\nstepping.T = 0.002\n"


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL)
    return path


def test_run_and_info(cfg_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "run.csv").exists() and (out / "manifest.json").exists()
    snap = sorted(out.glob("snap_*.bin"))[0]
    capsys.readouterr()
    assert main(["info", str(snap)]) == 0
    text = capsys.readouterr().out
    assert "d=2 N=64" in text and "phi range" in text


@pytest.mark.parametrize("body", ["physics.epsilon = 0.001\n", "scenario.radius = 0.6\n",
                                  "bogus = 1\n"])
def test_config_errors_exit_2(tmp_path, body, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text(body)
    assert main(["run", str(path)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_files_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "none.cfg")]) == 2
    assert main(["info", str(tmp_path / "none.bin")]) == 2


def test_blowup_exits_3(tmp_path):
    path = tmp_path / "hot.cfg"
    path.write_text(SMALL.replace("stepping.T = ", "stepping.dt = 0.05\nstepping.T = 0.5\n# "))
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 3


def test_sweep(cfg_path, capsys):
    assert main(["sweep", str(cfg_path), "--eps", "0.08"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "eps,surface_error,radius_error,status"
    assert len(lines) == 2 and lines[1].startswith("0.08,") and lines[1].endswith(",ok")


def test_sweep_validates_every_width_first(cfg_path, capsys):
    assert main(["sweep", str(cfg_path), "--eps", "0.08,0.001"]) == 2
    assert capsys.readouterr().out == ""
    assert main(["sweep", str(cfg_path), "--eps", "wide"]) == 2


def test_validate_subset_writes_json(tmp_path, capsys):
    report = tmp_path / "report.json"
    code = main(["validate", "--only", "9", "--json", str(report)])
    out = capsys.readouterr().out
    assert "criterion  9 mean curvature" in out
    doc = json.loads(report.read_text())
    assert [r["criterion"] for r in doc] == [9]
    assert code == (0 if doc[0]["passed"] else 4)
