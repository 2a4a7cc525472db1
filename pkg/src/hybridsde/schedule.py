"""Sampling-rate bookkeeping and block geometry for local means.

All quantities here are pure functions of the tuning constants: the sample
size ``n``, the step ``h``, the block exponents ``tau``, the reduced-data
exponents ``eta``, the tempering exponents ``q`` and the rate window
``n**-gamma <= h <= n**-gamma_prime``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, InsufficientBlocksError

# relative slack used when flooring quantities that are exact in real arithmetic
_FLOOR_SLACK = 1e-9
_WINDOW_RTOL = 1e-9


def _floor(x: float) -> int:
    return int(math.floor(x * (1.0 + _FLOOR_SLACK)))


@dataclass(frozen=True)
class TuningConfig:
    """Rate and tempering constants for the hybrid estimator.

    Besides the rate constants, two switches pick how the noise enters the
    effective diffusion: ``w1_mode`` (``"stage3"`` or ``"limit"``) for the
    initial alpha contrast, and ``drop_noise_in_A`` which removes the noise
    term from the full alpha quasi-likelihood altogether.
    """

    n: int
    h: float
    tau1: float = 2.0
    tau2: float = 2.0
    tau3: float = 2.0
    q1: float = 0.5
    q2: float = 0.5
    eta1: float = 61 / 70
    eta2: float = 61 / 70
    gamma: float = 0.7
    gamma_prime: float = 0.7
    w1_mode: str = "stage3"
    drop_noise_in_A: bool = False
    check_window: bool = field(default=True, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError(f"h must be positive, got {self.h!r}")
        for name in ("tau1", "tau2", "tau3"):
            t = getattr(self, name)
            if not 1.0 < t <= 2.0:
                raise ConfigError(f"{name}={t} outside (1, 2]")
        for name in ("q1", "q2"):
            q = getattr(self, name)
            if not 0.0 < q <= 0.5:
                raise ConfigError(f"{name}={q} outside (0, 1/2]")
        if not 2 / 3 < self.gamma < 1:
            raise ConfigError(f"gamma={self.gamma} outside (2/3, 1)")
        if not 0 < self.gamma_prime <= self.gamma:
            raise ConfigError(
                f"gamma_prime={self.gamma_prime} outside (0, gamma={self.gamma}]"
            )
        for name in ("eta1", "eta2"):
            e = getattr(self, name)
            if not self.gamma < e <= 1.0:
                raise ConfigError(f"{name}={e} outside (gamma={self.gamma}, 1]")
        if self.w1_mode not in ("stage3", "limit"):
            raise ConfigError(f"unknown w1_mode {self.w1_mode!r}")
        if self.check_window:
            lo = self.n ** (-self.gamma)
            hi = self.n ** (-self.gamma_prime)
            if self.h < lo * (1 - _WINDOW_RTOL) or self.h > hi * (1 + _WINDOW_RTOL):
                raise ConfigError(
                    f"h={self.h:.6g} outside rate window "
                    f"[n^-gamma, n^-gamma'] = [{lo:.6g}, {hi:.6g}]"
                )

    @property
    def T(self) -> float:
        """Observation horizon ``n * h``."""
        return self.n * self.h


@dataclass(frozen=True)
class BlockSchedule:
    """Block geometry for one ``tau``.

    ``p`` observations per block, block duration ``delta = p * h``, ``k``
    full-data blocks, and ``k_reduced`` blocks for the reduced-data
    initializer (equal to ``k`` when no ``eta`` was given).
    """

    tau: float
    h: float
    p: int
    delta: float
    k: int
    k_reduced: int
    t_reduced: float
    eta: Optional[float] = None


def make_schedule(cfg: TuningConfig, tau: float, eta: Optional[float] = None) -> BlockSchedule:
    """Build the block schedule for block exponent ``tau``.

    ``p = max(1, floor(h**(-1/tau)))`` and ``k = floor(n / p)``. With ``eta``
    the reduced block count is ``min(k, floor(n**eta / p))``.
    """
    if not 1.0 < tau <= 2.0:
        raise ConfigError(f"tau={tau} outside (1, 2]")
    if eta is not None and not cfg.gamma < eta <= 1.0:
        raise ConfigError(f"eta={eta} outside (gamma={cfg.gamma}, 1]")
    p = max(1, _floor(cfg.h ** (-1.0 / tau)))
    delta = p * cfg.h
    k = cfg.n // p
    if k - 2 < 1:
        raise InsufficientBlocksError(f"insufficient blocks: k={k} for p={p}, n={cfg.n}")
    if eta is None:
        k_red = k
    else:
        k_red = min(k, _floor(cfg.n ** eta / p))
        if k_red - 2 < 1:
            raise InsufficientBlocksError(
                f"insufficient blocks: k_reduced={k_red} for eta={eta}"
            )
    return BlockSchedule(
        tau=tau, h=cfg.h, p=p, delta=delta, k=k,
        k_reduced=k_red, t_reduced=k_red * delta, eta=eta,
    )


def _newton_steps(arg: float) -> int:
    if not arg > 0 or not math.isfinite(arg):
        raise ConfigError(f"log2 argument must be positive, got {arg!r}")
    # additive slack: -log2 of an exact power of two must floor to that power
    return max(1, math.floor(-math.log2(arg) + _FLOOR_SLACK))


def compute_J1(cfg: TuningConfig) -> int:
    """Number of Newton steps for the alpha block (at least one)."""
    arg = cfg.q1 * (cfg.eta1 - cfg.gamma / cfg.tau1) / (1 - cfg.gamma_prime / cfg.tau3)
    return _newton_steps(arg)


def compute_J2(cfg: TuningConfig) -> int:
    """Number of Newton steps for the beta block (at least one)."""
    arg = cfg.q2 * (cfg.eta2 - cfg.gamma) / (1 - cfg.gamma_prime)
    return _newton_steps(arg)
