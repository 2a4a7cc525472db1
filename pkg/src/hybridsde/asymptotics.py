"""Half-vectorisation helpers and plug-in asymptotic variances.

The limit covariance of ``(sqrt(n)(vech Lambda_hat - vech Lambda),
sqrt(k)(alpha_hat - alpha), sqrt(T)(beta_hat - beta))`` is ``J^{-1} I J^{-1}``
with block-diagonal ``I = diag(W1, I22, I33)`` and ``J = diag(Id, J22, J33)``.
The integrals against the invariant law in ``I22``, ``J22`` and ``I33`` are
replaced by averages over the local-mean states ``ybar[j-1]``.

Index maps here are 1-based, matching the usual ``(i, j)`` matrix notation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import ConfigError
from .model import ModelSpec, derivative, eval_A
from .preprocess import LocalMeanSeries
from .simulate import psd_sqrt


def sigma_index(d: int, i: int, j: int) -> int:
    """Position (1-based) of the upper-triangle entry ``(i, j)`` in ``vech``."""
    if not 1 <= i <= j <= d:
        raise ValueError(f"need 1 <= i <= j <= d, got i={i}, j={j}, d={d}")
    if i == 1:
        return j
    return sum(d - l + 1 for l in range(1, i)) + j - i + 1


def sigma_inverse(d: int, idx: int) -> tuple:
    """Inverse of :func:`sigma_index`."""
    if not 1 <= idx <= d * (d + 1) // 2:
        raise ValueError(f"index {idx} outside 1..{d * (d + 1) // 2}")
    i, start = 1, 0
    while idx > start + (d - i + 1):
        start += d - i + 1
        i += 1
    return i, i + idx - start - 1


def vech_pairs(d: int) -> list:
    """All ``(i, j)`` pairs in ``vech`` order (1-based)."""
    return [(i, j) for i in range(1, d + 1) for j in range(i, d + 1)]


def vech(M) -> np.ndarray:
    M = np.asarray(M)
    d = M.shape[0]
    return np.array([M[i - 1, j - 1] for i, j in vech_pairs(d)])


def noise_matrix_W1(Lambda, fourth_moments=None) -> np.ndarray:
    """Asymptotic covariance of ``sqrt(n) vech Lambda_hat``.

    Entry ``(i1, i2)`` is ``V(sigma^{-1}(i1), sigma^{-1}(i2))`` where ``V``
    combines the excess-kurtosis term over ``Lambda^{1/2}`` with the Gaussian
    part ``(3/2)(L13 L24 + L14 L23)``. ``fourth_moments`` defaults to 3 per
    component (Gaussian noise).
    """
    lam = np.atleast_2d(np.asarray(Lambda, dtype=float))
    d = lam.shape[0]
    if lam.shape != (d, d) or not np.allclose(lam, lam.T, rtol=1e-12, atol=1e-15):
        raise ConfigError("Lambda must be a symmetric matrix")
    if np.linalg.eigvalsh(lam).min() < -1e-12 * max(np.trace(lam), 1e-300):
        raise ConfigError("Lambda must be positive semi-definite")
    mu4 = np.full(d, 3.0) if fourth_moments is None else np.broadcast_to(
        np.asarray(fourth_moments, dtype=float), (d,))
    R = psd_sqrt(lam)
    pairs = [(i - 1, j - 1) for i, j in vech_pairs(d)]
    W = np.empty((len(pairs), len(pairs)))
    for a, (l1, l2) in enumerate(pairs):
        for b, (l3, l4) in enumerate(pairs):
            kurt = np.sum(R[l1] * R[l2] * R[l3] * R[l4] * (mu4 - 3.0))
            gauss = 1.5 * (lam[l1, l3] * lam[l2, l4] + lam[l1, l4] * lam[l2, l3])
            W[a, b] = kurt + gauss
    return 0.5 * (W + W.T)


@dataclass
class InformationEstimate:
    """Plug-in information blocks and per-block standard errors.

    Parameters are ordered ``(vech Lambda, alpha, beta)``. Entries of
    ``standard_errors`` for a block listed in ``block_failures`` are NaN.
    """

    I_hat: np.ndarray
    J_hat: np.ndarray
    standard_errors: np.ndarray
    noise_fourth_moments: np.ndarray
    blocks: dict = field(default_factory=dict)
    block_failures: dict = field(default_factory=dict)
    rates: dict = field(default_factory=dict)

    def block(self, name: str):
        s = self.blocks[name]
        return self.I_hat[s, s], self.J_hat[s, s], self.standard_errors[s]


def _inv_sym(M):
    if not np.all(np.isfinite(M)):
        raise np.linalg.LinAlgError("non-finite information block")
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] < 1e-12:
        raise np.linalg.LinAlgError("information block is singular")
    Minv = np.linalg.inv(M)
    return 0.5 * (Minv + Minv.T)


def alpha_information(model: ModelSpec, x, alpha, Lambda, tau: float):
    """Sample-average ``(I22, J22)`` over the states ``x`` (shape ``(K, d)``)."""
    lam = np.asarray(Lambda, dtype=float)
    A = eval_A(model, x, alpha)
    at2 = tau == 2.0
    Atau = A + 3.0 * lam if at2 else A
    Ainv = np.linalg.inv(Atau)
    G = derivative(model, "dA_dalpha", x, alpha)  # (K, m1, d, d)
    P = np.einsum("kab,kibc->kiac", Ainv, G)  # Atau^{-1} dA_i
    J22 = 0.5 * np.einsum("kiab,klba->kil", P, P).mean(axis=0)
    B = 0.75 * np.einsum("kiab,kbc->kiac", P, Ainv)
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    BA = np.einsum("kiab,kbc->kiac", B, A)
    I22 = np.einsum("kiab,klba->kil", BA, BA)
    if at2:
        BL = np.einsum("kiab,bc->kiac", B, lam)
        I22 = I22 + 4.0 * np.einsum("kiab,klba->kil", BA, BL) + 12.0 * np.einsum("kiab,klba->kil", BL, BL)
    I22 = I22.mean(axis=0)
    return 0.5 * (I22 + I22.T), 0.5 * (J22 + J22.T)


def beta_information(model: ModelSpec, x, alpha, beta):
    """Sample average of ``A^{-1}[db_i, db_l]`` over the states ``x``."""
    A = eval_A(model, x, alpha)
    Gb = derivative(model, "db_dbeta", x, beta)  # (K, m2, d)
    AiG = np.linalg.solve(A, np.swapaxes(Gb, -1, -2))  # (K, d, m2)
    I33 = np.einsum("kia,kal->kil", Gb, AiG).mean(axis=0)
    return 0.5 * (I33 + I33.T)


def plug_in_information(model: ModelSpec, lm3: LocalMeanSeries, theta_hat, Lambda_hat, n: int,
                        T: float, fourth_moments=None) -> InformationEstimate:
    """Plug-in ``I``, ``J`` and standard errors at ``theta_hat = (alpha, beta)``.

    Standard errors are ``sqrt(diag(J^{-1} I J^{-1}) / rate^2)`` per block
    with rates ``sqrt(n)``, ``sqrt(k)`` and ``sqrt(T)``. A singular ``J``
    block is reported in ``block_failures`` and gets NaN standard errors.
    """
    alpha, beta = (np.asarray(t, dtype=float) for t in theta_hat)
    lam = np.atleast_2d(np.asarray(getattr(Lambda_hat, "lambda_hat", Lambda_hat), dtype=float))
    d = lam.shape[0]
    sched = lm3.schedule
    x = lm3.ybar[: sched.k - 2]
    mu4 = np.full(d, 3.0) if fourth_moments is None else np.broadcast_to(
        np.asarray(fourth_moments, dtype=float), (d,)).copy()

    nv = d * (d + 1) // 2
    W1 = noise_matrix_W1(lam, mu4)
    I22, J22 = alpha_information(model, x, alpha, lam, sched.tau)
    I33 = beta_information(model, x, alpha, beta)
    J33 = I33.copy()

    rates = {"noise": float(n), "alpha": float(sched.k), "beta": float(T)}
    blocks = {"noise": slice(0, nv), "alpha": slice(nv, nv + alpha.size),
              "beta": slice(nv + alpha.size, nv + alpha.size + beta.size)}
    se = np.full(nv + alpha.size + beta.size, np.nan)
    failures = {}
    se[blocks["noise"]] = np.sqrt(np.clip(np.diag(W1), 0.0, None) / rates["noise"])
    for name, (I, J) in {"alpha": (I22, J22), "beta": (I33, J33)}.items():
        try:
            Ji = _inv_sym(J)
        except np.linalg.LinAlgError as exc:
            failures[name] = str(exc)
            continue
        cov = Ji @ I @ Ji
        se[blocks[name]] = np.sqrt(np.clip(np.diag(cov), 0.0, None) / rates[name])
    return InformationEstimate(
        I_hat=scipy.linalg.block_diag(W1, I22, I33),
        J_hat=scipy.linalg.block_diag(np.eye(nv), J22, J33),
        standard_errors=se, noise_fourth_moments=mu4,
        blocks=blocks, block_failures=failures, rates=rates,
    )
