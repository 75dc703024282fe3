import json
import subprocess
import sys
from pathlib import Path

import pytest

from fockdom.cli import main
from fockdom.config import parse_config


def _files(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_rho_prints_value(tmp_path, capsys):
    assert main(["run", "rho", "--weight", "abs2", "--z", "0,0", "--out", str(tmp_path)]) == 0
    assert abs(float(capsys.readouterr().out.split()[0]) - 0.282095) < 1e-6
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["status"] == "ok" and rep["subcommand"] == "rho"
    assert (tmp_path / "tables" / "rho.csv").exists()
    assert parse_config((tmp_path / "config.ini").read_text()).weight == "abs2"


def test_sample_full_plane(tmp_path):
    assert main(["sample", "--region", "full", "--nmax", "8", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert abs(rep["sampling"]["c_emp"] - 1) < 1e-8
    assert rep["sampling"]["n_max"] == 8


def test_exponent_too_small_exits_one(tmp_path, capsys):
    assert main(["run", "summability", "--m", "1.0", "--domain=-2,-2,2,2", "--out", str(tmp_path)]) == 1
    assert "ExponentTooSmall" in capsys.readouterr().err


def test_config_error_exits_one(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[run]\nseed = 1\n[covering]\ndelta = half\n")
    assert main(["rho", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "line 4" in capsys.readouterr().err
    assert main(["rho", "--weight", "bogus", "--out", str(tmp_path / "o")]) == 1


def test_failed_inequality_exits_two(tmp_path):
    # a supplied constant far above the true one makes the bound fail
    code = main(["toeplitz", "--symbol", "mix(0.1, disk(0, 0, 0.3))", "--level", "1", "--C", "1",
                 "--nmax", "6", "--out", str(tmp_path)])
    assert code == 2
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["status"] == "invariant_violation"
    assert rep["checks"]["inverse_norm_bound"] is False


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nz = 1,1\n[covering]\nsigma_ladder = 1,2\ndegree = 4\n")
    out = tmp_path / "o"
    assert main(["harmonic", "--config", str(cfg), "--degree", "3", "--out", str(out)]) == 0
    resolved = parse_config((out / "config.ini").read_text())
    assert resolved.degree == 3 and resolved.sigma_ladder == (1.0, 2.0) and resolved.z == (1 + 1j,)
    assert (out / "plotdata" / "a_sigma.csv").read_text().startswith("x,y\n")


def test_default_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("FOCKDOM_OUT", str(tmp_path))
    assert main(["rho"]) == 0
    assert (tmp_path / "rho" / "report.json").exists()


@pytest.mark.parametrize("argv", [
    ["remez", "--degree-ladder", "0..3", "--trials", "200", "--mc-points", "20000"],
    ["density", "--region", "complement(polka(pitch=0.28, dot=0.07))", "--z", "0,0;0.1,0.2"],
    ["covering", "--domain=-3,-3,3,3", "--probe-n", "80"],
])
def test_reports_are_byte_identical(tmp_path, argv):
    out = tmp_path / "run"
    assert main(argv + ["--out", str(out)]) == 0
    first = _files(out)
    assert main(argv + ["--out", str(out)]) == 0
    assert _files(out) == first and "report.json" in first
    # reports do not depend on where they are written
    other = tmp_path / "elsewhere"
    assert main(argv + ["--out", str(other)]) == 0
    strip = lambda fs: {k: v for k, v in fs.items() if k != "config.ini"}
    assert strip(_files(other)) == strip(first)


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "fockdom.cli", "rho", "--z", "0,0;1,1", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert len(out.stdout.split()) == 2
