"""Multi-step Newton refinement and the end-to-end hybrid pipeline.

Each refinement step is

    theta_k = theta_{k-1} - Jbar^{-1} (1/N) grad H(theta_{k-1}),
    J = (1/N) hess H(theta_{k-1}),

with ``N = k_{tau3}`` for alpha and ``N = T = n h`` for beta. ``Jbar`` is ``J``
when it is invertible and the identity otherwise. Iterates leaving the
parameter box are clamped back and the clamp is recorded.
"""
from __future__ import annotations

import json
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .bayes import McmcConfig, PosteriorSummary, initial_alpha, initial_beta
from .contrasts import ContrastValue, EffectiveDiffusion, contrast_derivatives
from .errors import StageError
from .model import ModelSpec, ParamSpace
from .preprocess import LocalMeanSeries, NoiseVariance, NoisyObservations, estimate_noise_variance, local_means
from .schedule import BlockSchedule, TuningConfig, compute_J1, compute_J2, make_schedule

RCOND_MIN = 1e-12


@dataclass
class NewtonTrace:
    """Iterates of one refinement run.

    All lists have length ``J + 1``; entry 0 describes the starting point
    (its fallback and clamp flags are always ``False``).
    """

    iterates: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    used_identity_fallback: list = field(default_factory=list)
    objective_values: list = field(default_factory=list)
    clamped: list = field(default_factory=list)
    normalizer: float = 1.0

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    def to_dict(self) -> dict:
        return {
            "iterates": [np.asarray(t).tolist() for t in self.iterates],
            "grad_norms": [float(g) for g in self.grad_norms],
            "used_identity_fallback": [bool(b) for b in self.used_identity_fallback],
            "objective_values": [float(v) for v in self.objective_values],
            "clamped": [bool(b) for b in self.clamped],
            "normalizer": float(self.normalizer),
        }


def newton_direction(cv: ContrastValue, normalizer: float):
    """Return ``(step, used_identity)`` for one guarded Newton update.

    ``step`` is added to the current iterate. The normalised Hessian is used
    when its reciprocal condition number is at least ``RCOND_MIN`` and the
    symmetric solve succeeds; otherwise ``Jbar`` is the identity and the step
    is ``-(1/N) grad``.
    """
    g = np.asarray(cv.gradient, dtype=float) / normalizer
    J = np.asarray(cv.hessian, dtype=float) / normalizer
    J = 0.5 * (J + J.T)
    if np.all(np.isfinite(J)):
        s = np.linalg.svd(J, compute_uv=False)
        if s[0] > 0 and s[-1] / s[0] >= RCOND_MIN:
            try:
                return -scipy.linalg.solve(J, g, assume_a="sym"), False
            except (np.linalg.LinAlgError, ValueError):
                pass
    return -g, True


def _refine(fun: Callable[[np.ndarray, bool], ContrastValue], theta0, J: int, normalizer: float,
            space: Optional[ParamSpace], stage: str) -> NewtonTrace:
    theta = np.asarray(theta0, dtype=float).copy()
    tr = NewtonTrace(normalizer=float(normalizer))
    try:
        cv = fun(theta, J > 0)
    except (ArithmeticError, ValueError) as exc:
        raise StageError(stage, exc, partial=tr) from exc
    tr.iterates.append(theta.copy())
    tr.objective_values.append(cv.value)
    tr.grad_norms.append(float(np.linalg.norm(cv.gradient)))
    tr.used_identity_fallback.append(False)
    tr.clamped.append(False)
    for k in range(1, J + 1):
        step, fallback = newton_direction(cv, normalizer)
        new = theta + step
        clamped = False
        if space is not None and not space.contains(new):
            clamped = True
            warnings.warn(f"{stage}: iterate {k} left the parameter box and was clamped",
                          RuntimeWarning, stacklevel=3)
            new = space.clip(new)
        theta = new
        try:
            cv = fun(theta, k < J)
        except (ArithmeticError, ValueError) as exc:
            raise StageError(stage, exc, partial=tr) from exc
        tr.iterates.append(theta.copy())
        tr.objective_values.append(cv.value)
        tr.grad_norms.append(float(np.linalg.norm(cv.gradient)))
        tr.used_identity_fallback.append(fallback)
        tr.clamped.append(clamped)
    return tr


def newton_refine_alpha(model: ModelSpec, alpha0, Lambda_hat, lm3: LocalMeanSeries, J1: int, *,
                        eff: Optional[EffectiveDiffusion] = None,
                        space: Optional[ParamSpace] = None, method: str = "auto") -> NewtonTrace:
    """``J1`` guarded Newton steps on the full alpha quasi-likelihood.

    The normaliser is the full-data block count ``k`` of ``lm3``.
    """
    Lambda_hat = getattr(Lambda_hat, "lambda_hat", Lambda_hat)

    def fun(a, hess):
        return contrast_derivatives("H1_full", a, model=model, lm=lm3, Lambda=Lambda_hat,
                                    eff=eff, space=space, method=method, hessian=hess)

    return _refine(fun, alpha0, int(J1), lm3.schedule.k, space, "alpha-newton")


def newton_refine_beta(model: ModelSpec, beta0, alpha, lm3: LocalMeanSeries, J2: int, T: float, *,
                       space: Optional[ParamSpace] = None, method: str = "auto") -> NewtonTrace:
    """``J2`` guarded Newton steps on the full beta quasi-likelihood given ``alpha``.

    ``T`` is the observation horizon ``n h`` used as normaliser.
    """

    def fun(b, hess):
        return contrast_derivatives("H2_full", b, model=model, lm=lm3, alpha=alpha,
                                    space=space, method=method, hessian=hess)

    return _refine(fun, beta0, int(J2), T, space, "beta-newton")


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class HybridResult:
    lambda_hat: NoiseVariance
    alpha_init: Optional[PosteriorSummary] = None
    beta_init: Optional[PosteriorSummary] = None
    alpha_trace: Optional[NewtonTrace] = None
    beta_trace: Optional[NewtonTrace] = None
    J1: int = 0
    J2: int = 0
    schedules: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def alpha_hat(self) -> Optional[np.ndarray]:
        return None if self.alpha_trace is None else self.alpha_trace.final

    @property
    def beta_hat(self) -> Optional[np.ndarray]:
        return None if self.beta_trace is None else self.beta_trace.final

    def to_dict(self) -> dict:
        def post(s):
            if s is None:
                return None
            return {"mean": s.mean.tolist(), "sd": s.sd.tolist(),
                    "acceptance_rate": s.acceptance_rate, "ess_estimate": s.ess_estimate}

        return {
            "lambda_hat": self.lambda_hat.lambda_hat.tolist(),
            "alpha_init": post(self.alpha_init),
            "beta_init": post(self.beta_init),
            "alpha_trace": None if self.alpha_trace is None else self.alpha_trace.to_dict(),
            "beta_trace": None if self.beta_trace is None else self.beta_trace.to_dict(),
            "alpha_hat": None if self.alpha_hat is None else self.alpha_hat.tolist(),
            "beta_hat": None if self.beta_hat is None else self.beta_hat.tolist(),
            "J1": self.J1,
            "J2": self.J2,
            "schedules": {k: asdict(v) for k, v in self.schedules.items()},
            "timings": dict(self.timings),
            "config": self.config,
        }

    def write_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        return path


def _config_echo(cfg: TuningConfig, mcmc_alpha: McmcConfig, mcmc_beta: McmcConfig) -> dict:
    tun = {k: v for k, v in asdict(cfg).items() if k != "check_window"}
    mc = lambda m: {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)
                    for k, v in asdict(m).items()}
    return {"tuning": tun, "mcmc_alpha": mc(mcmc_alpha), "mcmc_beta": mc(mcmc_beta)}


def hybrid_estimate(obs: NoisyObservations, model: ModelSpec, spaces, cfg: TuningConfig,
                    mcmc_alpha: McmcConfig, mcmc_beta: McmcConfig) -> HybridResult:
    """Run the whole pipeline on one data set.

    Stages, in order: noise variance, alpha initializer, alpha refinement,
    beta initializer, beta refinement (conditioning on the refined alpha).
    A failing stage raises :class:`StageError` whose ``partial`` attribute is
    the :class:`HybridResult` built so far.
    """
    alpha_space, beta_space = spaces
    res = HybridResult(lambda_hat=NoiseVariance(np.full((model.d, model.d), np.nan)),
                       J1=compute_J1(cfg), J2=compute_J2(cfg),
                       config=_config_echo(cfg, mcmc_alpha, mcmc_beta))

    def stage(label, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except StageError as exc:
            res.timings[label] = time.perf_counter() - t0
            raise StageError(label, exc.cause, partial=res) from exc
        except Exception as exc:
            res.timings[label] = time.perf_counter() - t0
            raise StageError(label, exc, partial=res) from exc
        res.timings[label] = time.perf_counter() - t0
        return out

    def schedules():
        s = {"tau1": make_schedule(cfg, cfg.tau1, cfg.eta1),
             "tau2": make_schedule(cfg, cfg.tau2, cfg.eta2),
             "tau3": make_schedule(cfg, cfg.tau3)}
        return s, local_means(obs, s["tau3"])

    res.schedules, lm3 = stage("schedule", schedules)
    res.lambda_hat = stage("noise-variance", lambda: estimate_noise_variance(obs))
    res.alpha_init = stage("alpha-init", lambda: initial_alpha(
        obs, model, spaces, cfg, res.lambda_hat, mcmc_alpha, lm=lm3))
    eff = EffectiveDiffusion("stage3", lm3.schedule.tau, lm3.schedule.delta, cfg.drop_noise_in_A)
    res.alpha_trace = stage("alpha-newton", lambda: newton_refine_alpha(
        model, res.alpha_init.mean, res.lambda_hat, lm3, res.J1, eff=eff, space=alpha_space))
    res.beta_init = stage("beta-init", lambda: initial_beta(obs, model, spaces, cfg, mcmc_beta, lm=lm3))
    res.beta_trace = stage("beta-newton", lambda: newton_refine_beta(
        model, res.beta_init.mean, res.alpha_hat, lm3, res.J2, obs.n * obs.h, space=beta_space))
    return res
