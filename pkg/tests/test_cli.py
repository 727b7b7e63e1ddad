import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from vortexlab.cli import main, system_from_dict, system_to_dict
from vortexlab.core import build_sphere_ring


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def test_stability_json():
    code, out = run("stability", "--family", "planar-ring-center", "--n", "5", "--lambda", "2.0",
                    "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "S" and d["closed_form"] == "S"
    assert isinstance(d["hessian_eigs"], list) and "xi" in d
    assert all(len(z) == 2 for z in d["linearization_eigs"])


def test_stability_sphere_ring_csv():
    code, out = run("stability", "--family", "sphere-ring", "--n", "6", "--theta0", "0.4")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.startswith("verdict,") and row.startswith("S,")


def test_degrees_flag():
    _, rad = run("stability", "--family", "sphere-ring", "--n", "5", "--theta0", str(math.radians(30)),
                 "--format", "json")
    _, deg = run("stability", "--family", "sphere-ring", "--n", "5", "--theta0", "30", "--deg",
                 "--format", "json")
    assert json.loads(rad)["verdict"] == json.loads(deg)["verdict"]


def test_usage_errors_exit_one(tmp_path):
    assert run("stability", "--family", "planar-ring-center", "--n", "5")[0] == 1
    assert run("stability")[0] == 1
    assert run("bogus")[0] == 1
    assert run("simulate", "--config", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": "plane", "vortices": [{"x": 0}]}')
    assert run("simulate", "--config", str(bad))[0] == 1
    assert run("sweep", "--family", "geostrophic-ring", "--n", "4", "--scan", "kappa",
               "--bracket", "0:5")[0] == 1


def test_simulate_csv_and_final_state_roundtrip(tmp_path):
    cfg = tmp_path / "pair.json"
    cfg.write_text(json.dumps({"model": "plane", "vortices": [
        {"x": -0.5, "y": 0.0, "lambda": 1.0}, {"x": 0.5, "y": 0.0, "strength": 1.0}]}))
    final = tmp_path / "final.json"
    out = tmp_path / "traj.csv"
    code, _ = run("simulate", "--config", str(cfg), "--t-end", "1", "--dt", "0.1",
                  "--out", str(out), "--final-state", str(final))
    assert code == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 12 and rows[0].startswith("t,")
    # reloading the final state reproduces it exactly
    data = json.loads(final.read_text())
    sys_ = system_from_dict(data)
    assert system_to_dict(sys_) == data


def test_config_roundtrip_sphere():
    s = build_sphere_ring(4, 0.7, 0.3, 0.2)
    d = system_to_dict(s)
    back = system_from_dict(json.loads(json.dumps(d)))
    assert np.array_equal(back.positions, s.positions)
    assert back.strengths == s.strengths and back.model == s.model


def test_config_ring_shorthand_in_degrees():
    a = system_from_dict({"model": "sphere", "unit": "deg", "family": "CNvR", "n": 4, "theta0": 60})
    b = build_sphere_ring(4, math.pi / 3)
    assert np.allclose(a.positions, b.positions, atol=1e-14)


def test_simulate_collision_exit_three(tmp_path):
    cfg = tmp_path / "collapse.json"
    cfg.write_text(json.dumps({"model": "plane", "vortices": [
        {"x": -1, "y": 0, "lambda": 2}, {"x": 1, "y": 0, "lambda": 2},
        {"x": 1, "y": math.sqrt(2), "lambda": -1}]}))
    code, out = run("simulate", "--config", str(cfg), "--t-end", "5", "--dt", "0.01")
    assert code == 3
    d = json.loads(out)
    assert d["error"] == "collision" and len(d["pair"]) == 2 and 0.5 < d["t"] < 2.0


def test_sweep_frontier_json():
    code, out = run("sweep", "--family", "geostrophic-ring", "--n", "6", "--scan", "kappa",
                    "--bracket", "0.5:2.5", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert abs(d["threshold"] - 1.28) < 0.02 and d["verdict_below"] == "S"


def test_sweep_writes_csv_and_meta(tmp_path):
    path = tmp_path / "diag.csv"
    code, _ = run("sweep", "--family", "geostrophic-ring-center", "--n", "4", "--kappa", "0:1:0.5",
                  "--lambda", "0.5:1.5:0.5", "--out", str(path), "--workers", "1")
    assert code == 0
    assert len(path.read_text().strip().splitlines()) == 1 + 3 * 3
    meta = json.loads(path.with_suffix(".meta.json").read_text())
    assert meta["n"] == 4 and meta["failed_cells"] == []


def test_verify_exit_codes():
    code, out = run("verify", "--suite", "trig")
    assert code == 0 and "trig,pass" in out
    code, out = run("verify", "--suite", "appendix-a", "--format", "json")
    assert code == 2
    assert json.loads(out)["passed"] is False
    code, _ = run("verify", "--suite", "appendix-a", "--points", "lattice")
    assert code == 0


def test_verify_persistence_single_omega():
    code, out = run("verify", "--suite", "persistence", "--omega", "0.3", "--format", "json")
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "vortexlab", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "vortexlab" in r.stdout
