import json
from pathlib import Path

import pytest

from occutime.cli import main

STUDY_CFG = """\
[process]
kind = brownian

[function]
descriptor = gaussian_bump

[study]
n_list = 16,32,64
refine = 16
paths = 200
seed = 42
"""

NORMS_CFG = """\
[function]
descriptor = gaussian_bump

[norms]
s = 1.0
norm = both
"""

SIM_CFG = """\
[process]
kind = brownian

[simulate]
n = 4
refine = 2
paths = 3
seed = 5
"""


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_missing_config_exits_1(tmp_path, capsys):
    rc = main(["norms", "--config", str(tmp_path / "absent.cfg")])
    assert rc == 1
    assert "absent.cfg" in capsys.readouterr().err


def test_unknown_key_exits_1_naming_key(tmp_path, capsys):
    cfg = _write(tmp_path, NORMS_CFG + "typo_key = 3\n")
    rc = main(["norms", "--config", cfg, "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "typo_key" in capsys.readouterr().err


def test_norms_reports_gaussian_h1(tmp_path):
    cfg = _write(tmp_path, NORMS_CFG)
    out = tmp_path / "out"
    assert main(["norms", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["summary"]["sobolev_value"] == pytest.approx(2.3597, abs=1e-3)
    assert (out / "norms.csv").exists()
    assert (out / "manifest.txt").exists()
    manifest = (out / "manifest.txt").read_text()
    assert "config_sha256" in manifest and "numpy" in manifest


def test_simulate_writes_paths_csv(tmp_path):
    cfg = _write(tmp_path, SIM_CFG)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "paths.csv").read_text().strip().split("\n")
    assert lines[0] == "path_id,time,x_1"
    assert len(lines) == 1 + 3 * 9


def test_rate_study_constant_flags_degenerate(tmp_path):
    cfg = _write(tmp_path, STUDY_CFG)
    out = tmp_path / "deg"
    rc = main(["rate-study", "--config", cfg, "--out", str(out),
               "--set", "function.descriptor=constant(c=2)",
               "--set", "study.paths=100"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["summary"]["riemann"]["degenerate"] is True
    # the resolved config reflects the overrides
    assert report["config"]["function"]["descriptor"] == "constant(c=2)"


def test_seed_flag_overrides_config(tmp_path):
    cfg = _write(tmp_path, STUDY_CFG)
    out = tmp_path / "seeded"
    assert main(["rate-study", "--config", cfg, "--out", str(out),
                 "--seed", "7"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["master_seed"] == 7


def test_reruns_byte_identical_across_threads(tmp_path):
    cfg = _write(tmp_path, STUDY_CFG)
    outs = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / name
        assert main(["rate-study", "--config", cfg, "--out", str(out),
                     "--threads", threads]) == 0
        outs.append((out / "rates.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_env_threads_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("OCCUTIME_THREADS", "2")
    cfg = _write(tmp_path, STUDY_CFG)
    assert main(["rate-study", "--config", cfg,
                 "--out", str(tmp_path / "env")]) == 0
    monkeypatch.setenv("OCCUTIME_THREADS", "junk")
    rc = main(["rate-study", "--config", cfg, "--out", str(tmp_path / "bad")])
    assert rc == 1


def test_bad_override_exits_1(tmp_path, capsys):
    cfg = _write(tmp_path, STUDY_CFG)
    rc = main(["rate-study", "--config", cfg, "--out", str(tmp_path / "x"),
               "--set", "study.nope=3"])
    assert rc == 1
    assert "nope" in capsys.readouterr().err
