import json
import subprocess
import sys

import numpy as np
import pytest

from hybridsde.cli import cli
from hybridsde.preprocess import read_observations

TINY_TOML = """
[experiment]
model = "ou-1d"
replications = 2
seed = 3
modes = ["hybrid", "ml-true-init"]
[data]
n = 20000
h_exponent = -0.7
substeps = 2
[mcmc.alpha]
n_iters = 500
burn_in = 100
[mcmc.beta]
n_iters = 500
burn_in = 100
"""


@pytest.fixture
def tiny_cfg(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY_TOML)
    return p


def test_simulate_then_estimate(tmp_path, capsys):
    obs_path = tmp_path / "obs.bin"
    assert cli(["simulate", "--model", "ou-1d", "--n", "20000", "--seed", "4", "--output", str(obs_path)]) == 0
    obs = read_observations(obs_path)
    assert obs.n == 20000 and obs.h == pytest.approx(20000 ** -0.7)
    out = tmp_path / "est.json"
    assert cli(["estimate", str(obs_path), "--model", "ou-1d", "--seed", "1", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["alpha_hat"]) == 1 and len(doc["beta_hat"]) == 1
    assert set(doc["standard_errors"]) == {"noise", "alpha", "beta"}
    assert "alpha_hat" in capsys.readouterr().out


def test_simulate_is_seeded(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    for p in (a, b):
        assert cli(["simulate", "--n", "1000", "--seed", "2", "--output", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    np.testing.assert_array_equal(read_observations(a).y, read_observations(b).y)


def test_experiment_and_tables(tmp_path, tiny_cfg, capsys):
    out = tmp_path / "exp"
    assert cli(["experiment", "--config", str(tiny_cfg), "--output-dir", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["report.json", "table1.csv", "table2.csv", "table3.csv", "table8.csv", "table9.csv"]
    first = capsys.readouterr().out
    assert "replication 1: ok" in first
    assert cli(["tables", "--report", str(out / "report.json")]) == 0
    text = (out / "tables.txt").read_text()
    assert "Table 8" in text and "Table 6" not in text


def test_exit_codes(tmp_path, tiny_cfg):
    assert cli(["simulate", "--bogus"]) == 1
    assert cli([]) == 1
    assert cli(["estimate", str(tmp_path / "missing.bin"), "--model", "ou-1d"]) == 1
    assert cli(["experiment"]) == 1
    assert cli(["experiment", "--config", str(tmp_path / "nope.toml")]) == 1
    assert cli(["tables", "--report", str(tmp_path / "nope.json")]) == 1
    obs = tmp_path / "o.bin"
    cli(["simulate", "--n", "500", "--output", str(obs)])
    assert cli(["estimate", str(obs), "--model", "paper-3d"]) == 1
    assert cli(["simulate", "--model", "paper-3d", "--n", "200", "--h", "0.05",
                "--noise-variance", "0", "--output", str(tmp_path / "x.bin")]) == 0
    # h far outside the rate window for n
    assert cli(["estimate", str(tmp_path / "x.bin"), "--model", "paper-3d"]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hybridsde", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout


def test_corrupt_input_is_a_runtime_failure(tmp_path):
    bad = tmp_path / "g.bin"
    bad.write_bytes(b"garbage\n")
    assert cli(["estimate", str(bad), "--model", "ou-1d"]) == 2
