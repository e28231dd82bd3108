import json
import os
import subprocess
import sys

import numpy as np
import pytest

from skelhom.cli import load_field, main

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "src",
                          "skelhom", "configs")


def run_cli(args):
    return main(args)


def test_usage_error_exit_code(capsys):
    assert run_cli(["converge", "/does/not/exist.json"]) == 1
    assert "error:" in capsys.readouterr().err


def test_mismatched_subcommand(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"experiment": "degree", "name": "x"}')
    assert run_cli(["converge", str(cfg)]) == 1


def test_smoke_config_runs_and_passes(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli(["converge", os.path.join(CONFIG_DIR, "smoke.json"),
                    "--out-dir", str(out)])
    assert code == 0
    report = json.load(open(out / "smoke.json"))
    assert report["verdict"] == "decreasing-to-tolerance"
    assert (out / "smoke.csv").exists()


def test_verdict_fail_exit_code(tmp_path, capsys):
    # single-entry schedule: final error equals initial, trend cannot pass
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "experiment": "converge", "name": "flat",
        "field": {"kind": "gauss-bump", "n": 2, "center": [0.5, 0.5]},
        "s": 0.4, "p": 2.0, "j": 1, "eps": [0.4], "t_count": 2,
        "samples": 1000, "seed": 0, "inner": [[0.0, 1.0], [0.0, 1.0]]}))
    assert run_cli(["converge", str(cfg), "--out-dir", str(tmp_path / "o")]) == 2


def test_overrides(tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    base = os.path.join(CONFIG_DIR, "smoke.json")
    # verdict may legitimately flip at tiny sample counts; only the exit
    # family matters here
    assert run_cli(["converge", base, "--out-dir", str(out1),
                    "--samples", "500"]) in (0, 2)
    assert run_cli(["converge", base, "--out-dir", str(out2),
                    "--samples", "500", "--seed", "99"]) in (0, 2)
    a = json.load(open(out1 / "smoke.json"))
    b = json.load(open(out2 / "smoke.json"))
    assert a["rows"][0]["min_error_p"] != b["rows"][0]["min_error_p"]


def test_golden_smoke_report(tmp_path, capsys):
    # determinism golden: the smoke report is byte-identical across runs
    out1, out2 = tmp_path / "g1", tmp_path / "g2"
    base = os.path.join(CONFIG_DIR, "smoke.json")
    assert run_cli(["converge", base, "--out-dir", str(out1)]) == 0
    assert run_cli(["converge", base, "--out-dir", str(out2)]) == 0
    for name in ("smoke.json", "smoke.csv", "smoke_min_error_p.dat"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_console_script_installed():
    proc = subprocess.run(["skelhom", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    for sub in ("norm", "converge", "w11-failure", "degree", "kernel-check",
                "pipeline", "approx-eval"):
        assert sub in proc.stdout


def test_grid_field_loading(tmp_path):
    ax = [0.0, 0.5, 1.0]
    vals = [a + b for a in ax for b in ax]          # row-major f = x + y
    f = load_field({"kind": "grid", "n": 2, "m": 1, "axes": [ax, ax],
                    "values": vals})
    assert f(np.array([0.5, 1.0])) == pytest.approx(1.5)
    # binary variant
    blob = tmp_path / "v.bin"
    np.asarray(vals, dtype="<f8").tofile(blob)
    f2 = load_field({"kind": "grid", "n": 2, "m": 1, "axes": [ax, ax],
                     "values": {"file": str(blob), "dtype": "<f8"}})
    assert f2(np.array([0.25, 0.25])) == pytest.approx(0.5)


def test_grid_field_size_mismatch():
    from skelhom.errors import ConfigError
    with pytest.raises(ConfigError):
        load_field({"kind": "grid", "n": 2, "m": 1,
                    "axes": [[0, 1], [0, 1]], "values": [1, 2, 3]})
