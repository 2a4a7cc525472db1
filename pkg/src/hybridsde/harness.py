"""Monte Carlo experiments: config files, replications, tables and reports.

An experiment simulates ``replications`` independent noisy paths and runs
any of four estimator pipelines on each:

``bayes-init``      tempered Bayes initializers only
``hybrid``          initializers followed by the Newton refinement
``ml-true-init``    L-BFGS-B on the full quasi-likelihoods started at the truth
``ml-uniform-init`` the same started at a uniform draw from the box

Outputs are ``table1.csv`` .. ``table9.csv`` (one per estimator and
parameter block, columns ``coordinate, mean, sd, truth``) and
``report.json`` with per-replication estimates, failures and timings.

Config files are TOML::

    [experiment]
    model = "paper-3d"
    replications = 20
    seed = 1
    modes = ["bayes-init", "hybrid", "ml-true-init", "ml-uniform-init"]

    [data]
    n = 1000000
    h_exponent = -0.7      # or h = 6.3e-5
    substeps = 10
    noise_variance = 1e-3  # Lambda = noise_variance * I, or a full matrix

    [tuning]               # TuningConfig fields
    [mcmc.alpha]           # McmcConfig fields
    [mcmc.beta]
"""
from __future__ import annotations

import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import scipy.optimize

from .bayes import McmcConfig, initial_alpha, initial_beta
from .contrasts import EffectiveDiffusion, contrast_derivatives
from .errors import ConfigError
from .model import ModelSpec, ParamSpace, get_model
from .multistep import hybrid_estimate
from .preprocess import LocalMeanSeries, NoisyObservations, estimate_noise_variance, local_means
from .schedule import TuningConfig, make_schedule
from .simulate import SimulationConfig, simulate_path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

MODES = ("bayes-init", "hybrid", "ml-true-init", "ml-uniform-init")
MAX_FAILURE_FRACTION = 0.10
PRESET_DIR = "presets"

# table number -> (estimator key, block, caption)
TABLES = {
    1: ("lambda", "noise", "noise variance estimator"),
    2: ("ml-true-init", "alpha", "adaptive ML estimator of alpha, started at the true value"),
    3: ("ml-true-init", "beta", "adaptive ML estimator of beta, started at the true value"),
    4: ("ml-uniform-init", "alpha", "adaptive ML estimator of alpha, uniform random start"),
    5: ("ml-uniform-init", "beta", "adaptive ML estimator of beta, uniform random start"),
    6: ("bayes-init", "alpha", "initial Bayes-type estimator of alpha (reduced data)"),
    7: ("bayes-init", "beta", "initial Bayes-type estimator of beta (reduced data)"),
    8: ("hybrid", "alpha", "hybrid multi-step estimator of alpha"),
    9: ("hybrid", "beta", "hybrid multi-step estimator of beta"),
}


class ExperimentAborted(RuntimeError):
    """Too many replications failed."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    tuning: TuningConfig
    mcmc_alpha: McmcConfig
    mcmc_beta: McmcConfig
    replications: int = 20
    seed: int = 0
    modes: tuple = MODES
    substeps: int = 10
    Lambda: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = None
    alpha_true: Optional[np.ndarray] = None
    beta_true: Optional[np.ndarray] = None
    ml_maxiter: int = 200
    output_dir: str = "output"
    threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.modes:
            raise ConfigError("at least one comparison mode is required")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown modes {bad}; expected a subset of {list(MODES)}")
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        rm = get_model(self.model)
        d = rm.spec.d
        defaults = {"Lambda": rm.Lambda_true, "x0": rm.x0,
                    "alpha_true": rm.alpha_true, "beta_true": rm.beta_true}
        for name, default in defaults.items():
            v = getattr(self, name)
            object.__setattr__(self, name, np.array(default if v is None else v, dtype=float))
        lam = np.atleast_2d(self.Lambda)
        if lam.shape == (1, 1) and d > 1:
            lam = lam[0, 0] * np.eye(d)
        object.__setattr__(self, "Lambda", lam)
        if self.alpha_true.shape != (rm.spec.m1,) or self.beta_true.shape != (rm.spec.m2,):
            raise ConfigError("true parameter lengths do not match the model")

    @property
    def n(self) -> int:
        return self.tuning.n

    @property
    def h(self) -> float:
        return self.tuning.h

    def simulation_config(self) -> SimulationConfig:
        return SimulationConfig(
            model=get_model(self.model).spec, alpha=self.alpha_true, beta=self.beta_true,
            x0=self.x0, n=self.n, h=self.h, Lambda=self.Lambda, substeps=self.substeps,
            seed=self.seed,
        )

    def echo(self) -> dict:
        def clean(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, tuple):
                return list(v)
            return v

        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "tuning":
                v = {k: x for k, x in asdict(v).items() if k != "check_window"}
            elif f.name.startswith("mcmc"):
                v = asdict(v)
            out[f.name] = clean(v)
        return out


def resolve_config_path(path) -> Path:
    """Return ``path`` if it exists, otherwise look it up among shipped presets."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.suffix else p.name + ".toml"
    preset = resources.files("hybridsde").joinpath(PRESET_DIR, name)
    if preset.is_file():
        return Path(str(preset))
    raise ConfigError(f"config file {path!s} not found (and no preset named {name!r})")


def _pick(section: dict, cls, where: str) -> dict:
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(unknown)}")
    return dict(section)


def config_from_dict(doc: dict, **overrides) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a parsed TOML document.

    ``overrides`` replace top-level experiment fields (``seed``, ``threads``,
    ``replications``, ``modes``, ``output_dir``) and may set
    ``drop_noise_in_A=True``.
    """
    doc = dict(doc)
    exp = dict(doc.pop("experiment", {}))
    data = dict(doc.pop("data", {}))
    tun = dict(doc.pop("tuning", {}))
    mc = dict(doc.pop("mcmc", {}))
    if doc:
        raise ConfigError(f"unknown config sections: {sorted(doc)}")
    if "model" not in exp:
        raise ConfigError("[experiment] model is required")
    try:
        n = int(data.pop("n"))
    except KeyError:
        raise ConfigError("[data] n is required") from None
    if "h" in data and "h_exponent" in data:
        raise ConfigError("give either [data] h or h_exponent, not both")
    if "h" in data:
        h = float(data.pop("h"))
    elif "h_exponent" in data:
        h = float(n) ** float(data.pop("h_exponent"))
    else:
        raise ConfigError("[data] h or h_exponent is required")
    drop = overrides.pop("drop_noise_in_A", None)
    if drop:
        tun["drop_noise_in_A"] = True
    try:
        tuning = TuningConfig(n=n, h=h, **_pick(tun, TuningConfig, "tuning"))
        mcmc_a = McmcConfig(**_pick(mc.pop("alpha", {}), McmcConfig, "mcmc.alpha"))
        mcmc_b = McmcConfig(**_pick(mc.pop("beta", {}), McmcConfig, "mcmc.beta"))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if mc:
        raise ConfigError(f"unknown [mcmc] subsections: {sorted(mc)}")
    kwargs = {}
    for key in ("substeps", "x0", "alpha_true", "beta_true"):
        if key in data:
            kwargs[key] = data.pop(key)
    if "noise_variance" in data:
        kwargs["Lambda"] = data.pop("noise_variance")
    if data:
        raise ConfigError(f"unknown keys in [data]: {sorted(data)}")
    for key in ("replications", "seed", "modes", "ml_maxiter", "output_dir", "threads"):
        if key in exp:
            kwargs[key] = exp.pop(key)
    model = exp.pop("model")
    if exp:
        raise ConfigError(f"unknown keys in [experiment]: {sorted(exp)}")
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    if "modes" in kwargs:
        kwargs["modes"] = tuple(kwargs["modes"])
    return ExperimentConfig(model=model, tuning=tuning, mcmc_alpha=mcmc_a, mcmc_beta=mcmc_b, **kwargs)


def load_experiment_config(path, **overrides) -> ExperimentConfig:
    p = resolve_config_path(path)
    try:
        with open(p, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return config_from_dict(doc, **overrides)


# ---------------------------------------------------------------------------
# adaptive ML by L-BFGS-B


@dataclass
class MLResult:
    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    alpha_converged: bool
    beta_converged: bool
    alpha_iterations: int
    beta_iterations: int

    def __iter__(self):
        return iter((self.alpha_hat, self.beta_hat))


def _maximize(fun, x0, space: ParamSpace, maxiter: int):
    """Maximise ``fun(theta) -> (value, grad)`` over the box with L-BFGS-B.

    Returns ``(best_x, converged, iterations)``; on non-convergence the best
    visited point is returned.
    """
    best = {"x": np.asarray(x0, dtype=float).copy(), "v": -math.inf}

    def neg(theta):
        try:
            v, g = fun(theta)
        except ArithmeticError:
            return math.inf, np.zeros_like(theta)
        if not math.isfinite(v):
            return math.inf, np.zeros_like(theta)
        if v > best["v"]:
            best["x"], best["v"] = theta.copy(), v
        return -v, -g

    res = scipy.optimize.minimize(
        neg, space.clip(x0), jac=True, method="L-BFGS-B",
        bounds=list(zip(space.lower, space.upper)),
        options={"maxiter": maxiter, "gtol": 1e-8, "ftol": 1e-15},
    )
    x = res.x if res.success and np.isfinite(res.fun) else best["x"]
    return space.clip(x), bool(res.success), int(res.nit)


def ml_from_init(obs: NoisyObservations, model: ModelSpec, spaces, cfg: TuningConfig, alpha0, beta0, *,
                 Lambda_hat=None, lm3: Optional[LocalMeanSeries] = None, maxiter: int = 200) -> MLResult:
    """Adaptive quasi-ML: alpha given ``Lambda_hat``, then beta given ``alpha_hat``.

    Objectives are normalised by ``k`` (alpha) and ``T = n h`` (beta) before
    being handed to the optimiser; gradients come from
    :func:`contrast_derivatives`.
    """
    alpha_space, beta_space = spaces
    if lm3 is None:
        lm3 = local_means(obs, make_schedule(cfg, cfg.tau3))
    if Lambda_hat is None:
        Lambda_hat = estimate_noise_variance(obs)
    lam = getattr(Lambda_hat, "lambda_hat", Lambda_hat)
    k = lm3.schedule.k
    T = obs.n * obs.h
    eff = EffectiveDiffusion("stage3", lm3.schedule.tau, lm3.schedule.delta, cfg.drop_noise_in_A)

    def f_alpha(a):
        cv = contrast_derivatives("H1_full", a, model=model, lm=lm3, Lambda=lam, eff=eff,
                                  space=alpha_space, hessian=False)
        return cv.value / k, cv.gradient / k

    a_hat, a_ok, a_it = _maximize(f_alpha, alpha0, alpha_space, maxiter)

    def f_beta(b):
        cv = contrast_derivatives("H2_full", b, model=model, lm=lm3, alpha=a_hat,
                                  space=beta_space, hessian=False)
        return cv.value / T, cv.gradient / T

    b_hat, b_ok, b_it = _maximize(f_beta, beta0, beta_space, maxiter)
    return MLResult(a_hat, b_hat, a_ok, b_ok, a_it, b_it)


# ---------------------------------------------------------------------------
# replications


def _child_seed(seed: int, tag: int, r: int) -> int:
    ss = np.random.SeedSequence([int(seed), int(tag)], spawn_key=(int(r),))
    return int(ss.generate_state(1, np.uint64)[0])


def run_replication(cfg: ExperimentConfig, r: int) -> dict:
    """Simulate path ``r`` and run every selected pipeline on it.

    Never raises: failures come back as ``{"ok": False, "error": ...}``.
    """
    out = {"replication": r, "ok": True, "error": None, "estimates": {}, "timings": {}}
    t_all = time.perf_counter()
    try:
        rm = get_model(cfg.model)
        spaces = (rm.alpha_space, rm.beta_space)
        sim = replace(cfg.simulation_config(), spawn_key=(int(r),))
        t0 = time.perf_counter()
        obs = simulate_path(sim)
        out["timings"]["simulate"] = time.perf_counter() - t0
        mc_a = replace(cfg.mcmc_alpha, seed=_child_seed(cfg.seed, 1, r))
        mc_b = replace(cfg.mcmc_beta, seed=_child_seed(cfg.seed, 2, r))
        est = out["estimates"]
        t0 = time.perf_counter()
        lam = estimate_noise_variance(obs)
        out["timings"]["lambda"] = time.perf_counter() - t0
        est["lambda"] = {"noise": _vech(lam.lambda_hat)}
        lm3 = local_means(obs, make_schedule(cfg.tuning, cfg.tuning.tau3))

        if "hybrid" in cfg.modes:
            t0 = time.perf_counter()
            res = hybrid_estimate(obs, rm.spec, spaces, cfg.tuning, mc_a, mc_b)
            out["timings"]["hybrid"] = time.perf_counter() - t0
            est["hybrid"] = {"alpha": res.alpha_hat.tolist(), "beta": res.beta_hat.tolist(),
                             "alpha_fallback": any(res.alpha_trace.used_identity_fallback),
                             "beta_fallback": any(res.beta_trace.used_identity_fallback),
                             "clamped": any(res.alpha_trace.clamped) or any(res.beta_trace.clamped)}
            if "bayes-init" in cfg.modes:
                # the hybrid run already contains the initializers
                est["bayes-init"] = {"alpha": res.alpha_init.mean.tolist(),
                                     "beta": res.beta_init.mean.tolist(),
                                     "alpha_accept": res.alpha_init.acceptance_rate,
                                     "beta_accept": res.beta_init.acceptance_rate}
                out["timings"]["bayes-init"] = res.timings["alpha-init"] + res.timings["beta-init"]
        elif "bayes-init" in cfg.modes:
            t0 = time.perf_counter()
            pa = initial_alpha(obs, rm.spec, spaces, cfg.tuning, lam, mc_a, lm=lm3)
            pb = initial_beta(obs, rm.spec, spaces, cfg.tuning, mc_b, lm=lm3)
            out["timings"]["bayes-init"] = time.perf_counter() - t0
            est["bayes-init"] = {"alpha": pa.mean.tolist(), "beta": pb.mean.tolist(),
                                 "alpha_accept": pa.acceptance_rate, "beta_accept": pb.acceptance_rate}

        starts = {}
        if "ml-true-init" in cfg.modes:
            starts["ml-true-init"] = (cfg.alpha_true, cfg.beta_true)
        if "ml-uniform-init" in cfg.modes:
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(_child_seed(cfg.seed, 3, r))))
            a0 = rm.alpha_space.lower + rng.random(rm.spec.m1) * rm.alpha_space.width
            b0 = rm.beta_space.lower + rng.random(rm.spec.m2) * rm.beta_space.width
            starts["ml-uniform-init"] = (a0, b0)
        for key, (a0, b0) in starts.items():
            t0 = time.perf_counter()
            ml = ml_from_init(obs, rm.spec, spaces, cfg.tuning, a0, b0, Lambda_hat=lam, lm3=lm3,
                              maxiter=cfg.ml_maxiter)
            out["timings"][key] = time.perf_counter() - t0
            est[key] = {"alpha": ml.alpha_hat.tolist(), "beta": ml.beta_hat.tolist(),
                        "alpha_converged": ml.alpha_converged, "beta_converged": ml.beta_converged,
                        "start_alpha": np.asarray(a0).tolist(), "start_beta": np.asarray(b0).tolist()}
    except Exception as exc:  # recorded, replication excluded
        out["ok"] = False
        out["error"] = f"{type(exc).__name__}: {exc}"
    out["timings"]["total"] = time.perf_counter() - t_all
    return out


def _vech(M) -> list:
    M = np.asarray(M)
    return [float(M[i, j]) for i in range(M.shape[0]) for j in range(i, M.shape[0])]


def sample_sd(values) -> float:
    """Corrected two-pass sample standard deviation (``ddof=1``; 0 for one value)."""
    v = [float(x) for x in values]
    if len(v) < 2:
        return 0.0
    m = math.fsum(v) / len(v)
    dev = [x - m for x in v]
    # the second term cancels the rounding error of m
    ss = math.fsum(e * e for e in dev) - math.fsum(dev) ** 2 / len(v)
    return math.sqrt(max(ss, 0.0) / (len(v) - 1))


def sample_mean(values) -> float:
    v = [float(x) for x in values]
    return math.fsum(v) / len(v)


# ---------------------------------------------------------------------------
# report


@dataclass
class TableSummary:
    number: int
    estimator: str
    block: str
    caption: str
    coordinates: list
    mean: list
    sd: list
    truth: list
    mean_time: float = float("nan")


@dataclass
class ExperimentReport:
    tables: dict
    replications: list
    failures: list
    n_requested: int
    n_succeeded: int
    stage_mean_times: dict
    config: dict
    seeds: dict = field(default_factory=dict)

    def estimates(self, estimator: str, block: str) -> np.ndarray:
        """``(replications, m)`` array of successful estimates."""
        return np.array([rep["estimates"][estimator][block] for rep in self.replications])

    def to_dict(self) -> dict:
        return {
            "tables": {str(k): asdict(v) for k, v in self.tables.items()},
            "replications": self.replications,
            "failures": self.failures,
            "n_requested": self.n_requested,
            "n_succeeded": self.n_succeeded,
            "stage_mean_times": self.stage_mean_times,
            "config": self.config,
            "seeds": self.seeds,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        tables = {int(k): TableSummary(**v) for k, v in doc["tables"].items()}
        return cls(tables=tables, replications=doc["replications"], failures=doc["failures"],
                   n_requested=doc["n_requested"], n_succeeded=doc["n_succeeded"],
                   stage_mean_times=doc["stage_mean_times"], config=doc["config"],
                   seeds=doc.get("seeds", {}))


def _coord_names(block: str, d: int, m: int) -> list:
    if block == "noise":
        return [f"Lambda{i + 1}{j + 1}" for i in range(d) for j in range(i, d)]
    return [f"{block}{i + 1}" for i in range(m)]


def summarize(cfg: ExperimentConfig, results: Sequence[dict]) -> ExperimentReport:
    ok = sorted((r for r in results if r["ok"]), key=lambda r: r["replication"])
    failures = [{"replication": r["replication"], "error": r["error"]}
                for r in sorted(results, key=lambda r: r["replication"]) if not r["ok"]]
    rm = get_model(cfg.model)
    d = rm.spec.d
    truths = {"noise": _vech(cfg.Lambda), "alpha": cfg.alpha_true.tolist(), "beta": cfg.beta_true.tolist()}
    stage_keys = sorted({k for r in ok for k in r["timings"]})
    stage_times = {k: sample_mean([r["timings"][k] for r in ok if k in r["timings"]]) for k in stage_keys}
    tables = {}
    for num, (key, block, caption) in TABLES.items():
        if key != "lambda" and key not in cfg.modes:
            continue
        if not ok:
            continue
        vals = np.array([r["estimates"][key][block] for r in ok], dtype=float)
        tables[num] = TableSummary(
            number=num, estimator=key, block=block, caption=caption,
            coordinates=_coord_names(block, d, vals.shape[1]),
            mean=[sample_mean(vals[:, i]) for i in range(vals.shape[1])],
            sd=[sample_sd(vals[:, i]) for i in range(vals.shape[1])],
            truth=truths[block],
            mean_time=stage_times.get(key, float("nan")),
        )
    seeds = {"seed_base": cfg.seed,
             "mcmc_alpha": {r["replication"]: _child_seed(cfg.seed, 1, r["replication"]) for r in results},
             "mcmc_beta": {r["replication"]: _child_seed(cfg.seed, 2, r["replication"]) for r in results}}
    return ExperimentReport(tables=tables, replications=list(ok), failures=failures,
                            n_requested=cfg.replications, n_succeeded=len(ok),
                            stage_mean_times=stage_times, config=cfg.echo(), seeds=seeds)


def write_table_csv(path, table: TableSummary) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["coordinate", "mean", "sd", "truth"])
        for c, m, s, t in zip(table.coordinates, table.mean, table.sd, table.truth):
            w.writerow([c, repr(float(m)), repr(float(s)), repr(float(t))])
    return path


def write_report(report: ExperimentReport, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [write_table_csv(out / f"table{num}.csv", t) for num, t in sorted(report.tables.items())]
    p = out / "report.json"
    p.write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    written.append(p)
    return written


def run_experiment(cfg: ExperimentConfig, out_dir=None, progress=None) -> ExperimentReport:
    """Run all replications, aggregate, and (if ``out_dir``) write the outputs.

    Replications run in a process pool of ``cfg.threads`` workers; the
    aggregation order is by replication index, so results do not depend on
    scheduling. More than 10% failed replications raises
    :class:`ExperimentAborted`.
    """
    reps = range(cfg.replications)
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run_replication, [cfg] * cfg.replications, reps))
    else:
        results = []
        for r in reps:
            results.append(run_replication(cfg, r))
            if progress is not None:
                progress(results[-1])
    n_fail = sum(not r["ok"] for r in results)
    if n_fail > MAX_FAILURE_FRACTION * cfg.replications:
        errs = "; ".join(f"#{r['replication']}: {r['error']}" for r in results if not r["ok"])
        raise ExperimentAborted(f"{n_fail} of {cfg.replications} replications failed: {errs}")
    report = summarize(cfg, results)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def render_tables(report: ExperimentReport) -> str:
    """Aligned text tables: one row of means, one row of ``(sd)``, plus time."""
    blocks = []
    for num, t in sorted(report.tables.items()):
        heads = [f"{c}({_fmt_truth(v)})" for c, v in zip(t.coordinates, t.truth)]
        means = [f"{m:.3f}" for m in t.mean]
        sds = [f"({s:.3f})" for s in t.sd]
        time_s = "" if not math.isfinite(t.mean_time) else f"{t.mean_time:.1f}"
        widths = [max(len(a), len(b), len(c)) for a, b, c in zip(heads, means, sds)]
        label_w = max(len(t.estimator), 6)
        line = lambda lab, cells, tail: (
            f"{lab:<{label_w}} | " + "  ".join(f"{c:>{w}}" for c, w in zip(cells, widths)) + f" || {tail}"
        )
        rows = [f"Table {num}: {t.caption}",
                line("", heads, "time(sec.)"),
                line("", means, ""),
                line(t.estimator, sds, time_s)]
        rule = "-" * max(len(r) for r in rows[1:])
        blocks.append("\n".join([rows[0], rule, rows[1], rule, rows[2], rows[3], rule]))
    footer = f"replications: {report.n_succeeded} of {report.n_requested} succeeded"
    return "\n\n".join(blocks + [footer]) + "\n"


def _fmt_truth(v: float) -> str:
    return f"{v:g}"
