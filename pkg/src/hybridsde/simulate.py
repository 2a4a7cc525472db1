"""Euler-Maruyama paths observed with additive i.i.d. noise.

Random streams come from numpy's counter-based ``Philox`` generator. A seed
(or ``(seed_base, replication)`` pair) is expanded by ``SeedSequence`` into two
independent child streams: one for the Brownian increments and one for the
observation noise, so the latent path does not depend on the noise law.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Union

import numba
import numpy as np

from .errors import ConfigError, SimulationExplosionError
from .model import ModelSpec
from .preprocess import NoisyObservations

EXPLOSION_BOUND = 1e12
_CHUNK_OBS = 1 << 14


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to generate one noisy sample path.

    ``noise_law`` is ``"gaussian"`` or a callable ``(rng, shape) -> array`` that
    must return symmetric, zero-mean, unit-variance independent draws.
    """

    model: ModelSpec
    alpha: np.ndarray
    beta: np.ndarray
    x0: np.ndarray
    n: int
    h: float
    Lambda: np.ndarray
    substeps: int = 10
    noise_law: Union[str, Callable] = "gaussian"
    seed: int = 0
    spawn_key: tuple = field(default=(), repr=False)

    def __post_init__(self):
        for name in ("alpha", "beta", "x0"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        lam = np.atleast_2d(np.asarray(self.Lambda, dtype=float))
        object.__setattr__(self, "Lambda", lam)
        if self.substeps < 1:
            raise ConfigError("substeps must be >= 1")
        if self.n < 1 or self.h <= 0:
            raise ConfigError("need n >= 1 and h > 0")
        if lam.shape != (self.model.d, self.model.d):
            raise ConfigError(f"Lambda must be {self.model.d}x{self.model.d}")
        if not np.allclose(lam, lam.T) or np.linalg.eigvalsh(lam).min() < -1e-12 * max(1.0, np.trace(lam)):
            raise ConfigError("Lambda must be symmetric positive semi-definite")
        if self.x0.shape != (self.model.d,):
            raise ConfigError(f"x0 must have length {self.model.d}")
        if not (self.noise_law == "gaussian" or callable(self.noise_law)):
            raise ConfigError(f"unknown noise law {self.noise_law!r}")


def psd_sqrt(M) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    M = np.asarray(M, dtype=float)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _streams(seed: int, spawn_key: tuple):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=spawn_key)
    w_ss, e_ss = ss.spawn(2)
    return np.random.Generator(np.random.Philox(w_ss)), np.random.Generator(np.random.Philox(e_ss))


@numba.njit
def _euler_chunk(x, alpha, beta, dt, sqdt, Z, out, drift, diffusion, bound):
    """Advance ``x`` in place through ``Z.shape[0]`` observation intervals.

    Returns the index of the first exploding interval, or -1.
    """
    nobs, substeps, r = Z.shape
    d = x.shape[0]
    b = np.empty(d)
    a = np.empty((d, r))
    for i in range(nobs):
        for s in range(substeps):
            drift(x, beta, b)
            diffusion(x, alpha, a)
            for u in range(d):
                acc = 0.0
                for v in range(r):
                    acc += a[u, v] * Z[i, s, v]
                x[u] += b[u] * dt + acc * sqdt
        for u in range(d):
            if not (abs(x[u]) <= bound):
                return i
            out[i, u] = x[u]
    return -1


def _euler_python(x, alpha, beta, dt, Z, out, model):
    sqdt = np.sqrt(dt)
    for i in range(Z.shape[0]):
        for s in range(Z.shape[1]):
            b = np.asarray(model.drift(x, beta), dtype=float)
            a = np.asarray(model.diffusion(x, alpha), dtype=float)
            x = x + b * dt + a @ Z[i, s] * sqdt
        if not np.all(np.abs(x) <= EXPLOSION_BOUND):
            return x, i
        out[i] = x
    return x, -1


def simulate_latent(cfg: SimulationConfig, rng_w: np.random.Generator) -> np.ndarray:
    """Latent states ``X[0..n]`` at the observation times."""
    model = cfg.model
    X = np.empty((cfg.n + 1, model.d))
    X[0] = cfg.x0
    x = cfg.x0.copy()
    dt = cfg.h / cfg.substeps
    jit = model.nb_drift is not None and model.nb_diffusion is not None
    done = 0
    while done < cfg.n:
        m = min(_CHUNK_OBS, cfg.n - done)
        Z = rng_w.standard_normal((m, cfg.substeps, model.r))
        out = X[done + 1 : done + 1 + m]
        if jit:
            bad = _euler_chunk(x, cfg.alpha, cfg.beta, dt, np.sqrt(dt), Z, out,
                               model.nb_drift, model.nb_diffusion, EXPLOSION_BOUND)
        else:
            x, bad = _euler_python(x, cfg.alpha, cfg.beta, dt, Z, out, model)
        if bad >= 0:
            raise SimulationExplosionError(
                f"explosion: |X| exceeded {EXPLOSION_BOUND:g} at observation {done + bad + 1}",
                index=done + bad + 1,
            )
        done += m
    return X


def simulate_path(cfg: SimulationConfig, return_components: bool = False):
    """Simulate one noisy path ``Y = X + Lambda^{1/2} eps``.

    With ``return_components`` the latent states and raw noise draws are
    returned as well: ``(obs, X, eps)``.
    """
    rng_w, rng_e = _streams(cfg.seed, cfg.spawn_key)
    X = simulate_latent(cfg, rng_w)
    shape = X.shape
    if cfg.noise_law == "gaussian":
        eps = rng_e.standard_normal(shape)
    else:
        eps = np.asarray(cfg.noise_law(rng_e, shape), dtype=float)
    root = psd_sqrt(cfg.Lambda)
    Y = X + eps @ root  # root is symmetric
    obs = NoisyObservations(y=Y, h=cfg.h)
    if return_components:
        return obs, X, eps
    return obs


def replication_config(cfg: SimulationConfig, seed_base: int, r: int) -> SimulationConfig:
    from dataclasses import replace

    return replace(cfg, seed=seed_base, spawn_key=(int(r),))


def batch_simulate(cfg: SimulationConfig, replications: int, seed_base: int,
                   start: int = 0) -> Iterator[NoisyObservations]:
    """Yield independent replications ``start .. start+replications-1``.

    Replication ``r`` depends only on ``(seed_base, r)``.
    """
    for r in range(start, start + replications):
        yield simulate_path(replication_config(cfg, seed_base, r))


def student_t_noise(df: float) -> Callable:
    """Unit-variance Student-t noise law (``df > 4`` for finite fourth moment)."""
    if df <= 2:
        raise ConfigError("Student-t noise needs df > 2 for unit variance scaling")
    scale = np.sqrt((df - 2.0) / df)

    def law(rng, shape):
        return rng.standard_t(df, size=shape) * scale

    return law
