"""Bayes-type initial estimators: posterior means under a uniform prior on a box.

Two Metropolis-Hastings kernels are available:

``rwm``
    Gaussian random walk with a diagonal proposal, folded back into the box
    by coordinate-wise reflection. Reflection keeps the proposal symmetric,
    so the plain Metropolis ratio applies.
``mpcn``
    Mixed preconditioned Crank-Nicolson (Kamatani, 2018). Proposals are
    made in standardized coordinates ``y = (theta - center) / scale``; the
    kernel is reversible with respect to ``|y|^{-m} dy`` and proposals
    outside the box are rejected.

Proposal tuning (Robbins-Monro on the global step and diagonal rescaling
from the chain's own history) happens during burn-in only and is frozen
afterwards.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .contrasts import EffectiveDiffusion, H1_tempered, H2_tempered
from .errors import ConfigError, DegeneratePosteriorError, ModelEvaluationError
from .model import ModelSpec, ParamSpace
from .preprocess import LocalMeanSeries, NoisyObservations, local_means
from .schedule import TuningConfig, make_schedule

DEGENERATE_STREAK = 1000
_N_BATCHES = 32


@dataclass(frozen=True)
class McmcConfig:
    """Sampler settings.

    ``proposal_scale`` is in parameter units; ``None`` means 5% of the box
    width per coordinate. ``init="search"`` starts the chain at the best of
    ``n_init`` uniform prior draws (plus the box center), ``"center"`` at the
    center. ``target_accept=None`` disables adaptation.
    """

    n_iters: int = 5000
    burn_in: int = 1000
    proposal_scale: Optional[object] = None
    sampler: str = "rwm"
    seed: int = 0
    target_accept: Optional[float] = 0.35
    mpcn_rho: float = 0.8
    init: str = "search"
    n_init: int = 256
    store_chain: bool = False

    def __post_init__(self):
        if not 0 <= self.burn_in < self.n_iters:
            raise ConfigError("need 0 <= burn_in < n_iters")
        if self.sampler not in ("rwm", "mpcn"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if self.proposal_scale is not None and np.any(np.asarray(self.proposal_scale) <= 0):
            raise ConfigError("proposal_scale must be positive")
        if self.target_accept is not None and not 0 < self.target_accept < 1:
            raise ConfigError("target_accept must lie in (0, 1)")
        if not 0 < self.mpcn_rho < 1:
            raise ConfigError("mpcn_rho must lie in (0, 1)")
        if self.init not in ("search", "center"):
            raise ConfigError(f"unknown init {self.init!r}")


@dataclass
class PosteriorSummary:
    mean: np.ndarray
    acceptance_rate: float
    ess_estimate: float
    sd: np.ndarray
    chain: Optional[np.ndarray] = field(default=None, repr=False)
    log_target: Optional[np.ndarray] = field(default=None, repr=False)
    accepted: Optional[np.ndarray] = field(default=None, repr=False)


def reflect_into(x, lower, upper):
    """Fold ``x`` into ``[lower, upper]`` by repeated reflection at the faces."""
    w = upper - lower
    t = np.mod(x - lower, 2.0 * w)
    return lower + np.where(t > w, 2.0 * w - t, t)


class _Welford:
    def __init__(self, m):
        self.n = 0
        self.mean = np.zeros(m)
        self.m2 = np.zeros(m)

    def push(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    @property
    def sd(self):
        if self.n < 2:
            return np.zeros_like(self.mean)
        return np.sqrt(self.m2 / (self.n - 1))


def _safe(log_target):
    def f(theta):
        try:
            v = float(log_target(theta))
        except (ModelEvaluationError, FloatingPointError):
            return -math.inf
        return v if not math.isnan(v) else -math.inf

    return f


def posterior_mean(log_target: Callable, space: ParamSpace, mcmc: McmcConfig,
                   init=None) -> PosteriorSummary:
    """Posterior mean of ``exp(log_target)`` under a uniform prior on ``space``.

    Returns the average of the post-burn-in states together with the
    acceptance rate (post burn-in), a batch-means effective sample size and
    the per-coordinate posterior standard deviation.
    """
    f = _safe(log_target)
    m = space.dim
    lo, hi = space.lower, space.upper
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(mcmc.seed)))
    if not math.isfinite(f(space.center)):
        raise DegeneratePosteriorError("log-target is not finite at the box center")

    if init is not None:
        x = space.clip(init)
    elif mcmc.init == "center":
        x = space.center.copy()
    else:
        cands = lo + rng.random((mcmc.n_init, m)) * (hi - lo)
        cands = np.vstack([space.center[None, :], cands])
        vals = np.array([f(c) for c in cands])
        x = cands[int(np.argmax(vals))].copy()
    lp = f(x)
    if not math.isfinite(lp):
        x, lp = space.center.copy(), f(space.center)

    if mcmc.proposal_scale is None:
        base = 0.05 * space.width
    else:
        base = np.broadcast_to(np.asarray(mcmc.proposal_scale, dtype=float), (m,)).copy()

    adapt = mcmc.target_accept is not None and mcmc.burn_in > 0
    target = mcmc.target_accept if adapt else None
    n_post = mcmc.n_iters - mcmc.burn_in
    checkpoints = {mcmc.burn_in // 2, (3 * mcmc.burn_in) // 4} if adapt else set()
    window = _Welford(m)
    post = _Welford(m)
    batch = max(1, n_post // _N_BATCHES)
    batch_sums, batch_acc = [], np.zeros(m)
    n_acc = 0
    streak = 0
    log_lam = 0.0

    mpcn = mcmc.sampler == "mpcn"
    center = space.center.copy()
    mscale = 0.25 * space.width
    rho = mcmc.mpcn_rho
    logit_rho = math.log(rho / (1 - rho))

    chain = np.empty((n_post, m)) if mcmc.store_chain else None
    chain_lp = np.empty(n_post) if mcmc.store_chain else None
    chain_acc = np.empty(n_post, dtype=bool) if mcmc.store_chain else None

    normals = rng.standard_normal((mcmc.n_iters, m))
    uniforms = rng.random(mcmc.n_iters)

    for t in range(mcmc.n_iters):
        if mpcn:
            y = (x - center) / mscale
            r2 = float(y @ y)
            g = rng.gamma(m / 2.0, 2.0 / max(r2, 1e-300))
            y_new = math.sqrt(rho) * y + math.sqrt(1 - rho) * normals[t] / math.sqrt(g)
            prop = center + mscale * y_new
            if np.all(prop >= lo) and np.all(prop <= hi):
                lp_new = f(prop)
                log_ratio = lp_new - lp + m * (
                    0.5 * math.log(max(float(y_new @ y_new), 1e-300)) - 0.5 * math.log(max(r2, 1e-300))
                )
            else:
                lp_new = -math.inf
                log_ratio = -math.inf
        else:
            prop = reflect_into(x + math.exp(log_lam) * base * normals[t], lo, hi)
            lp_new = f(prop)
            log_ratio = lp_new - lp

        if lp_new == -math.inf:
            streak += 1
            if streak >= DEGENERATE_STREAK:
                raise DegeneratePosteriorError(
                    f"log-target was -inf for {DEGENERATE_STREAK} consecutive proposals"
                )
        else:
            streak = 0
        a = 1.0 if log_ratio >= 0 else (math.exp(log_ratio) if log_ratio > -745 else 0.0)
        accepted = uniforms[t] < a
        if accepted:
            x, lp = prop, lp_new

        if t < mcmc.burn_in:
            if adapt:
                gain = 1.0 / (t + 1) ** 0.6
                if mpcn:
                    logit_rho = min(max(logit_rho - 2.0 * gain * (a - target), -6.0), 6.0)
                    rho = 1.0 / (1.0 + math.exp(-logit_rho))
                else:
                    log_lam += 2.0 * gain * (a - target)
                window.push(x)
                if t + 1 in checkpoints and window.n > 10:
                    sd = window.sd
                    if np.all(sd > 0):
                        if mpcn:
                            center, mscale = window.mean.copy(), sd.copy()
                        else:
                            base = (2.38 / math.sqrt(m)) * sd
                            log_lam = 0.0
                    window = _Welford(m)
            continue

        i = t - mcmc.burn_in
        n_acc += accepted
        post.push(x)
        batch_acc += x
        if (i + 1) % batch == 0:
            batch_sums.append(batch_acc / batch)
            batch_acc = np.zeros(m)
        if chain is not None:
            chain[i], chain_lp[i], chain_acc[i] = x, lp, accepted

    sd = post.sd
    ess = float(n_post)
    if len(batch_sums) >= 2:
        bm = np.array(batch_sums)
        var_bm = bm.var(axis=0, ddof=1)
        mask = var_bm > 0
        if np.any(mask):
            ess_c = (sd[mask] ** 2) / (batch * var_bm[mask]) * n_post
            ess = float(min(n_post, ess_c.min()))
    return PosteriorSummary(
        mean=space.clip(post.mean), acceptance_rate=n_acc / n_post, ess_estimate=ess,
        sd=sd, chain=chain, log_target=chain_lp, accepted=chain_acc,
    )


def write_chain_csv(path, summary: PosteriorSummary, burn_in: int = 0) -> Path:
    """Dump a stored chain as ``iter, theta_1..theta_m, log_target, accepted``."""
    if summary.chain is None:
        raise ValueError("chain was not stored; set McmcConfig.store_chain=True")
    path = Path(path)
    m = summary.chain.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iter"] + [f"theta_{i + 1}" for i in range(m)] + ["log_target", "accepted"])
        for i, row in enumerate(summary.chain):
            w.writerow([burn_in + i] + [repr(float(v)) for v in row]
                       + [repr(float(summary.log_target[i])), int(summary.accepted[i])])
    return path


def alpha_target(model: ModelSpec, Lambda_hat, lm: LocalMeanSeries, cfg: TuningConfig):
    eff = EffectiveDiffusion(cfg.w1_mode, lm.schedule.tau, lm.schedule.delta)
    return lambda a: H1_tempered(model, a, Lambda_hat, lm, cfg.q1, eff)


def beta_target(model: ModelSpec, lm: LocalMeanSeries, cfg: TuningConfig):
    return lambda b: H2_tempered(model, b, lm, cfg.q2)


def _reduced_means(obs, cfg, tau, eta, lm):
    sched = make_schedule(cfg, tau, eta)
    if lm is not None and lm.schedule.p == sched.p and lm.ybar.shape[0] >= sched.k:
        return LocalMeanSeries(ybar=lm.ybar, schedule=sched)
    return local_means(obs, sched)


def initial_alpha(obs: NoisyObservations, model: ModelSpec, spaces, cfg: TuningConfig,
                  Lambda_hat, mcmc: McmcConfig, lm: Optional[LocalMeanSeries] = None) -> PosteriorSummary:
    """Posterior mean of the tempered alpha contrast on the reduced data."""
    lm1 = _reduced_means(obs, cfg, cfg.tau1, cfg.eta1, lm)
    Lambda_hat = getattr(Lambda_hat, "lambda_hat", Lambda_hat)
    return posterior_mean(alpha_target(model, Lambda_hat, lm1, cfg), spaces[0], mcmc)


def initial_beta(obs: NoisyObservations, model: ModelSpec, spaces, cfg: TuningConfig,
                 mcmc: McmcConfig, lm: Optional[LocalMeanSeries] = None) -> PosteriorSummary:
    """Posterior mean of the tempered beta contrast on the reduced data."""
    lm2 = _reduced_means(obs, cfg, cfg.tau2, cfg.eta2, lm)
    return posterior_mean(beta_target(model, lm2, cfg), spaces[1], mcmc)
