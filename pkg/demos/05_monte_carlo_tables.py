"""A small Monte Carlo study driven by a TOML config.

The same machinery backs ``hybridsde experiment``. Here the shipped
desk-scale preset is shrunk to a few short paths so it runs in seconds;
the full preset takes a few minutes per replication batch.
"""
import tempfile
from pathlib import Path

from hybridsde.harness import config_from_dict, render_tables, run_experiment

doc = {
    "experiment": {"model": "ou-1d", "replications": 5, "seed": 10},
    "data": {"n": 100_000, "h_exponent": -0.7, "substeps": 5, "noise_variance": 1e-3},
    "mcmc": {"alpha": {"n_iters": 1500, "burn_in": 300}, "beta": {"n_iters": 1500, "burn_in": 300}},
}
cfg = config_from_dict(doc)
out = Path(tempfile.mkdtemp(prefix="hybridsde-demo-"))
report = run_experiment(cfg, out_dir=out, progress=lambda r: print(f"  replication {r['replication']} done"))
print(render_tables(report))
print("CSV tables and report.json in", out)
