"""Command-line entry point: ``hybridsde {simulate,estimate,experiment,tables}``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .asymptotics import plug_in_information
from .bayes import McmcConfig
from .errors import ConfigError
from .harness import (
    ExperimentReport, load_experiment_config, render_tables, run_experiment,
)
from .model import REGISTRY, get_model
from .multistep import hybrid_estimate
from .preprocess import local_means, read_observations, write_observations
from .schedule import TuningConfig, make_schedule
from .simulate import SimulationConfig, simulate_path

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="TOML config file or name of a shipped preset")
    g.add_argument("--seed", type=int, help="base seed (overrides the config)")
    g.add_argument("--threads", type=int, help="worker processes for replications")
    g.add_argument("--output-dir", help="directory for outputs (default: from config or '.')")
    g.add_argument("--drop-noise-in-A", action="store_true",
                   help="use A instead of A + 3 Lambda in the full alpha quasi-likelihood")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="hybridsde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate one noisy path")
    s.add_argument("--model", choices=sorted(REGISTRY), default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--h", type=float, default=None, help="step (default n**-0.7)")
    s.add_argument("--substeps", type=int, default=None)
    s.add_argument("--noise-variance", type=float, default=None,
                   help="Lambda = value * I (default: the model's reference value)")
    s.add_argument("--output", default=None, help="observation file (.bin or .csv)")

    e = sub.add_parser("estimate", parents=[common], help="run the hybrid estimator on a file")
    e.add_argument("input", help="observation file (.bin or .csv)")
    e.add_argument("--model", choices=sorted(REGISTRY), default=None)
    e.add_argument("--h", type=float, default=None, help="step for CSV files without an h line")
    e.add_argument("--output", default=None, help="result JSON (default OUTPUT_DIR/estimate.json)")

    x = sub.add_parser("experiment", parents=[common], help="Monte Carlo experiment")
    x.add_argument("--replications", type=int, default=None)
    x.add_argument("--modes", nargs="+", default=None)

    t = sub.add_parser("tables", parents=[common], help="render a report as text tables")
    t.add_argument("--report", default=None, help="report.json (default OUTPUT_DIR/report.json)")
    return parser


def _load_cfg(args, **extra):
    if args.config is None:
        return None
    return load_experiment_config(
        args.config, seed=args.seed, threads=args.threads,
        drop_noise_in_A=args.drop_noise_in_A, **extra,
    )


def _out_dir(args, cfg) -> Path:
    if args.output_dir:
        return Path(args.output_dir)
    if cfg is not None:
        return Path(cfg.output_dir)
    return Path(".")


def _cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    name = args.model or (cfg.model if cfg else None) or "ou-1d"
    rm = get_model(name)
    n = args.n or (cfg.n if cfg else 100_000)
    h = args.h or (cfg.h if cfg and args.n is None else float(n) ** -0.7)
    if cfg is not None and cfg.model == name:
        Lam, x0, a, b = cfg.Lambda, cfg.x0, cfg.alpha_true, cfg.beta_true
        substeps = cfg.substeps
    else:
        Lam, x0, a, b, substeps = rm.Lambda_true, rm.x0, rm.alpha_true, rm.beta_true, 10
    if args.noise_variance is not None:
        Lam = args.noise_variance * np.eye(rm.spec.d)
    seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
    sim = SimulationConfig(rm.spec, a, b, x0, n, h, Lam, substeps=args.substeps or substeps, seed=seed)
    obs = simulate_path(sim)
    out = Path(args.output) if args.output else _out_dir(args, cfg) / "observations.bin"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_observations(out, obs)
    print(f"wrote {out} (model={name}, n={n}, h={h:.6g}, d={rm.spec.d}, seed={seed})")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    cfg = _load_cfg(args)
    obs = read_observations(args.input, h=args.h)
    name = args.model or (cfg.model if cfg else None)
    if name is None:
        raise ConfigError("estimate needs --model or a config naming the model")
    rm = get_model(name)
    if rm.spec.d != obs.d:
        raise ConfigError(f"model {name} has d={rm.spec.d} but the file has d={obs.d}")
    if cfg is not None:
        tun = replace(cfg.tuning, n=obs.n, h=obs.h)
        mc_a, mc_b = cfg.mcmc_alpha, cfg.mcmc_beta
    else:
        tun = TuningConfig(n=obs.n, h=obs.h, drop_noise_in_A=args.drop_noise_in_A)
        mc_a, mc_b = McmcConfig(), McmcConfig()
    if args.seed is not None:
        mc_a, mc_b = replace(mc_a, seed=args.seed), replace(mc_b, seed=args.seed + 1)
    res = hybrid_estimate(obs, rm.spec, (rm.alpha_space, rm.beta_space), tun, mc_a, mc_b)
    doc = res.to_dict()
    lm3 = local_means(obs, make_schedule(tun, tun.tau3))
    info = plug_in_information(rm.spec, lm3, (res.alpha_hat, res.beta_hat), res.lambda_hat,
                               obs.n, obs.n * obs.h)
    doc["standard_errors"] = {name: info.standard_errors[s].tolist() for name, s in info.blocks.items()}
    doc["standard_error_failures"] = info.block_failures
    doc["input"] = str(args.input)
    doc["model"] = name
    out = Path(args.output) if args.output else _out_dir(args, cfg) / "estimate.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    np.set_printoptions(precision=4, suppress=True)
    print(f"alpha_hat = {res.alpha_hat}  (J1={res.J1})")
    print(f"beta_hat  = {res.beta_hat}  (J2={res.J2})")
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.config is None:
        raise ConfigError("experiment needs --config")
    cfg = _load_cfg(args, replications=args.replications, modes=args.modes)
    out = _out_dir(args, cfg)

    def progress(rep):
        state = "ok" if rep["ok"] else f"FAILED ({rep['error']})"
        print(f"replication {rep['replication']}: {state} [{rep['timings']['total']:.1f}s]", flush=True)

    report = run_experiment(cfg, out_dir=out, progress=progress)
    print(render_tables(report))
    print(f"wrote {len(report.tables)} tables and report.json to {out}")
    return EXIT_OK


def _cmd_tables(args) -> int:
    path = Path(args.report) if args.report else _out_dir(args, None) / "report.json"
    if not path.exists():
        raise ConfigError(f"report {path} not found")
    report = ExperimentReport.from_dict(json.loads(path.read_text(encoding="utf-8")))
    text = render_tables(report)
    (path.parent / "tables.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


_COMMANDS = {"simulate": _cmd_simulate, "estimate": _cmd_estimate,
             "experiment": _cmd_experiment, "tables": _cmd_tables}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"hybridsde: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"hybridsde: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli())
