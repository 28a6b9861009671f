import json

import numpy as np
import pytest

from torusflow import io, simulation
from torusflow.config import parse_config
from torusflow.errors import UsageError

SMALL = ("grid.N = 64\nphysics.epsilon = 0.08\nstepping.T = 0.004\n"
         "diagnostics.record_interval = 2\noutput.snapshot_interval = 2\n")


def test_snapshot_round_trip_is_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    phi = rng.standard_normal((32, 32))
    u = rng.standard_normal((2, 32, 32))
    path = tmp_path / "s.bin"
    io.write_snapshot(path, phi, u, 0.125, 0.08)
    phi2, u2, head = io.read_snapshot(path)
    assert phi2.tobytes() == phi.tobytes() and u2.tobytes() == u.tobytes()
    assert head == {"version": 1, "d": 2, "N": 32, "t": 0.125, "eps": 0.08}
    assert path.stat().st_size == io.HEADER_BYTES + 3 * 32 * 32 * 8


def test_snapshot_errors(tmp_path):
    with pytest.raises(UsageError):
        io.write_snapshot(tmp_path / "a.bin", np.zeros((8, 8)), np.zeros((2, 8, 4)), 0, 0.1)
    (tmp_path / "junk.bin").write_bytes(b"x" * 64)
    with pytest.raises(UsageError, match="not a snapshot"):
        io.read_snapshot(tmp_path / "junk.bin")
    io.write_snapshot(tmp_path / "b.bin", np.zeros((8, 8)), np.zeros((2, 8, 8)), 0, 0.1)
    data = (tmp_path / "b.bin").read_bytes()
    (tmp_path / "c.bin").write_bytes(data[:-8])
    with pytest.raises(UsageError, match="expected"):
        io.read_snapshot(tmp_path / "c.bin")


def test_run_outputs(tmp_path):
    cfg = parse_config(SMALL)
    code, hist = simulation.run_simulation(cfg, str(tmp_path))
    assert code == 0 and hist.status == "ok"
    table = io.read_timeseries(tmp_path / "run.csv")
    assert list(table) == list(io.CSV_COLUMNS)
    assert len(table["t"]) == len(hist.records)
    assert np.all(np.diff(table["t"]) > 0)
    assert table["brakke_lhs"][0] == 0.0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert parse_config(manifest["config"]) == cfg
    for entry in manifest["files"]:
        path = tmp_path / entry["file"]
        assert path.stat().st_size == entry["bytes"]
        assert io.sha256(path) == entry["sha256"]
    snaps = sorted(p.name for p in tmp_path.glob("snap_*.bin"))
    assert snaps and all(name in {e["file"] for e in manifest["files"]} for name in snaps)
    phi, u, head = io.read_snapshot(tmp_path / snaps[0])
    assert head["t"] == 0.0 and phi.shape == (64, 64)


def test_csv_header_is_checked(tmp_path):
    (tmp_path / "bad.csv").write_text("t,kinetic\n0,1\n")
    with pytest.raises(UsageError):
        io.read_timeseries(tmp_path / "bad.csv")


def test_blowup_run_exits_3(tmp_path):
    cfg = parse_config(SMALL.replace("stepping.T = ", "stepping.dt = 0.05\nstepping.T = 0.5\n# "))
    code, hist = simulation.run_simulation(cfg, str(tmp_path))
    assert code == 3 and hist.status == "blowup"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "blowup" and manifest["error"]
    assert (tmp_path / "blowup.bin").exists()
