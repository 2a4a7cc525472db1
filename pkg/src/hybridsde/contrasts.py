"""Quasi-likelihood contrasts built on local means.

Every objective sums over blocks ``j = 1 .. K-2`` with state ``ybar[j-1]`` and
increment ``ybar[j+1] - ybar[j]``:

* ``W1``: least-squares match of scaled squared increments to ``(2/3) A_eff``;
* ``W2``: least-squares drift contrast;
* ``H1_full``: Gaussian quasi-log-likelihood in alpha with ``A_eff``;
* ``H2_full``: Gaussian quasi-log-likelihood in beta given alpha.

The ``*_tempered`` variants rescale ``W1``/``W2`` on the reduced data for the
Bayes-type initializers. Scalar sums are compensated (``math.fsum``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonPDError
from .model import FD_STEP, FD_STEP_NESTED, ModelSpec, ParamSpace, derivative, eval_A, eval_b
from .preprocess import LocalMeanSeries


@dataclass(frozen=True)
class EffectiveDiffusion:
    """Map ``(A, Lambda) -> A + c * Lambda`` for a block exponent ``tau``.

    ``mode="limit"`` uses ``c = 3`` at ``tau = 2`` and 0 otherwise.
    ``mode="stage3"`` uses ``c = 3 * delta**((2 - tau) / (tau - 1))``, which is
    also 3 at ``tau = 2``. ``drop_noise`` forces ``c = 0``.
    """

    mode: str
    tau: float
    delta: float
    drop_noise: bool = False

    def __post_init__(self):
        if self.mode not in ("limit", "stage3"):
            raise ValueError(f"unknown effective diffusion mode {self.mode!r}")

    @property
    def noise_coef(self) -> float:
        if self.drop_noise:
            return 0.0
        if self.tau == 2.0:
            return 3.0
        if self.mode == "limit":
            return 0.0
        return 3.0 * self.delta ** ((2.0 - self.tau) / (self.tau - 1.0))

    def __call__(self, A, Lambda):
        if Lambda is None:
            return A
        return A + self.noise_coef * np.asarray(Lambda, dtype=float)


@dataclass
class ContrastValue:
    value: float
    gradient: Optional[np.ndarray] = None
    hessian: Optional[np.ndarray] = None


def stage3_diffusion(sched, drop_noise: bool = False) -> EffectiveDiffusion:
    return EffectiveDiffusion("stage3", sched.tau, sched.delta, drop_noise)


def _blocks(lm: LocalMeanSeries, k_used: Optional[int]):
    K = lm.schedule.k if k_used is None else int(k_used)
    if K > lm.ybar.shape[0]:
        raise ValueError(f"k_used={K} exceeds available blocks {lm.ybar.shape[0]}")
    if K - 2 < 1:
        raise ValueError(f"k_used={K} leaves no contrast terms")
    yb = lm.ybar
    return yb[: K - 2], yb[2:K] - yb[1 : K - 1], lm.schedule.delta


def _fsum(terms) -> float:
    """Compensated sum over blocks of the per-block totals."""
    terms = np.asarray(terms, dtype=float)
    if terms.ndim > 1:
        terms = terms.reshape(terms.shape[0], -1).sum(axis=1)
    return math.fsum(terms)


def _block_sum(arr) -> np.ndarray:
    """Sum over the leading block axis with numpy's pairwise reduction."""
    arr = np.asarray(arr)
    flat = np.ascontiguousarray(arr.reshape(arr.shape[0], -1).T)
    return flat.sum(axis=1).reshape(arr.shape[1:])


# ---------------------------------------------------------------------------
# objectives


def W1(model: ModelSpec, alpha, Lambda, lm: LocalMeanSeries, k_used=None,
       eff: Optional[EffectiveDiffusion] = None) -> float:
    x, D, delta = _blocks(lm, k_used)
    eff = eff or stage3_diffusion(lm.schedule)
    R = D[:, :, None] * D[:, None, :] / delta - (2.0 / 3.0) * eff(eval_A(model, x, alpha), Lambda)
    return -0.5 * _fsum(R * R)


def W2(model: ModelSpec, beta, lm: LocalMeanSeries, k_used=None) -> float:
    x, D, delta = _blocks(lm, k_used)
    r = D - delta * eval_b(model, x, beta)
    return -0.5 * _fsum(r * r) / delta


def tempering_factor_alpha(sched, q1: float) -> float:
    return float(sched.k_reduced) ** (-(1.0 - 2.0 * q1))


def tempering_factor_beta(sched, q2: float) -> float:
    return float(sched.t_reduced) ** (-(1.0 - 2.0 * q2))


def H1_tempered(model, alpha, Lambda, lm: LocalMeanSeries, q1: float,
                eff: Optional[EffectiveDiffusion] = None) -> float:
    sched = lm.schedule
    return tempering_factor_alpha(sched, q1) * W1(model, alpha, Lambda, lm, sched.k_reduced, eff)


def H2_tempered(model, beta, lm: LocalMeanSeries, q2: float) -> float:
    sched = lm.schedule
    return tempering_factor_beta(sched, q2) * W2(model, beta, lm, sched.k_reduced)


def _cholesky(M, theta):
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        for j in range(M.shape[0]):
            try:
                np.linalg.cholesky(M[j])
            except np.linalg.LinAlgError:
                raise NonPDError(
                    f"non-PD effective diffusion at block j={j + 1}", block=j + 1, theta=theta
                ) from None
        raise


def _chol_solve(L, B):
    """Solve ``(L L^T) X = B`` for batched lower-triangular ``L``."""
    z = np.linalg.solve(L, B)
    return np.linalg.solve(np.swapaxes(L, -1, -2), z)


def H1_full(model: ModelSpec, alpha, Lambda, lm: LocalMeanSeries,
            eff: Optional[EffectiveDiffusion] = None) -> float:
    x, D, delta = _blocks(lm, None)
    eff = eff or stage3_diffusion(lm.schedule)
    M = eff(eval_A(model, x, alpha), Lambda)
    L = _cholesky(M, alpha)
    z = np.linalg.solve(L, D[:, :, None])[..., 0]
    quad = (1.5 / delta) * np.sum(z * z, axis=1)
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
    return -0.5 * _fsum(quad + logdet)


def H2_full(model: ModelSpec, beta, alpha, lm: LocalMeanSeries) -> float:
    x, D, delta = _blocks(lm, None)
    L = _cholesky(eval_A(model, x, alpha), alpha)
    r = D - delta * eval_b(model, x, beta)
    z = np.linalg.solve(L, r[:, :, None])[..., 0]
    return -0.5 * _fsum(z * z) / delta


# ---------------------------------------------------------------------------
# derivatives


def fd_gradient(f, theta, space: Optional[ParamSpace] = None, rel: float = FD_STEP) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    eps = rel * (1.0 + np.abs(theta))
    g = np.empty(theta.size)
    for i in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        hp = hm = eps[i]
        if space is not None and theta[i] + eps[i] > space.upper[i]:
            hp = 0.0
        if space is not None and theta[i] - eps[i] < space.lower[i]:
            hm = 0.0
        if hp == 0.0 and hm == 0.0:
            hp = hm = eps[i]
        elif hp == 0.0 or hm == 0.0:
            hp, hm = (2 * eps[i], 0.0) if hp else (0.0, 2 * eps[i])
        tp[i] += hp
        tm[i] -= hm
        g[i] = (f(tp) - f(tm)) / (hp + hm)
    return g


def fd_hessian(f, theta, rel: float = FD_STEP_NESTED) -> np.ndarray:
    """Central-difference Hessian of a scalar function, symmetric by construction."""
    theta = np.asarray(theta, dtype=float)
    m = theta.size
    eps = rel * (1.0 + np.abs(theta))
    H = np.empty((m, m))
    f0 = None
    for i in range(m):
        for l in range(i, m):
            if i == l:
                if f0 is None:
                    f0 = f(theta)
                tp, tm = theta.copy(), theta.copy()
                tp[i] += eps[i]
                tm[i] -= eps[i]
                H[i, i] = (f(tp) - 2.0 * f0 + f(tm)) / eps[i] ** 2
                continue
            vals = []
            for si, sl in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                t = theta.copy()
                t[i] += si * eps[i]
                t[l] += sl * eps[l]
                vals.append(f(t))
            H[i, l] = H[l, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * eps[i] * eps[l])
    return H


def _w1_analytic(model, alpha, Lambda, lm, k_used, eff, space, hessian):
    x, D, delta = _blocks(lm, k_used)
    eff = eff or stage3_diffusion(lm.schedule)
    R = D[:, :, None] * D[:, None, :] / delta - (2.0 / 3.0) * eff(eval_A(model, x, alpha), Lambda)
    G = derivative(model, "dA_dalpha", x, alpha, space)
    value = -0.5 * _fsum(R * R)
    grad = (2.0 / 3.0) * _block_sum(np.einsum("kab,kiab->ki", R, G))
    H = None
    if hessian:
        G2 = derivative(model, "d2A_dalpha2", x, alpha, space)
        per = -(2.0 / 3.0) * np.einsum("klab,kiab->kil", G, G) + np.einsum("kab,kilab->kil", R, G2)
        H = (2.0 / 3.0) * _block_sum(per)
        H = 0.5 * (H + H.T)
    return ContrastValue(value, grad, H)


def _w2_analytic(model, beta, lm, k_used, space, hessian):
    x, D, delta = _blocks(lm, k_used)
    r = D - delta * eval_b(model, x, beta)
    Gb = derivative(model, "db_dbeta", x, beta, space)
    value = -0.5 * _fsum(r * r) / delta
    grad = _block_sum(np.einsum("ka,kia->ki", r, Gb))
    H = None
    if hessian:
        Gb2 = derivative(model, "d2b_dbeta2", x, beta, space)
        per = -delta * np.einsum("kla,kia->kil", Gb, Gb) + np.einsum("ka,kila->kil", r, Gb2)
        H = _block_sum(per)
        H = 0.5 * (H + H.T)
    return ContrastValue(value, grad, H)


def _h1_analytic(model, alpha, Lambda, lm, eff, space, hessian):
    x, D, delta = _blocks(lm, None)
    eff = eff or stage3_diffusion(lm.schedule)
    M = eff(eval_A(model, x, alpha), Lambda)
    L = _cholesky(M, alpha)
    d = M.shape[-1]
    Minv = _chol_solve(L, np.broadcast_to(np.eye(d), M.shape))
    Minv = 0.5 * (Minv + np.swapaxes(Minv, -1, -2))
    u = np.einsum("kab,kb->ka", Minv, D)
    c = 1.5 / delta
    z = np.linalg.solve(L, D[:, :, None])[..., 0]
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
    value = -0.5 * _fsum(c * np.sum(z * z, axis=1) + logdet)
    G = derivative(model, "dA_dalpha", x, alpha, space)
    P = np.einsum("kab,kibc->kiac", Minv, G)  # Minv G_i
    Gu = np.einsum("kiab,kb->kia", G, u)
    grad = 0.5 * _block_sum(c * np.einsum("ka,kia->ki", u, Gu) - np.einsum("kiaa->ki", P))
    H = None
    if hessian:
        G2 = derivative(model, "d2A_dalpha2", x, alpha, space)
        PGu = np.einsum("kab,kib->kia", Minv, Gu)
        t_quad = 2.0 * np.einsum("kla,kia->kil", Gu, PGu) - np.einsum("ka,kilab,kb->kil", u, G2, u, optimize=True)
        t_tr = np.einsum("klab,kiba->kil", P, P)
        t_tr2 = np.einsum("kab,kilba->kil", Minv, G2)
        H = -0.5 * _block_sum(c * t_quad - t_tr + t_tr2)
        H = 0.5 * (H + H.T)
    return ContrastValue(value, grad, H)


def _h2_analytic(model, beta, alpha, lm, space, hessian):
    x, D, delta = _blocks(lm, None)
    A = eval_A(model, x, alpha)
    L = _cholesky(A, alpha)
    r = D - delta * eval_b(model, x, beta)
    z = np.linalg.solve(L, r[:, :, None])[..., 0]
    value = -0.5 * _fsum(z * z) / delta
    Gb = derivative(model, "db_dbeta", x, beta, space)
    # A^{-1} applied to r and to every column of the drift Jacobian
    Air = _chol_solve(L, r[:, :, None])[..., 0]
    grad = _block_sum(np.einsum("ka,kia->ki", Air, Gb))
    H = None
    if hessian:
        Gb2 = derivative(model, "d2b_dbeta2", x, beta, space)
        AiG = _chol_solve(L, np.swapaxes(Gb, -1, -2))  # (K, d, m)
        per = -delta * np.einsum("kla,kai->kil", Gb, AiG) + np.einsum("ka,kila->kil", Air, Gb2)
        H = _block_sum(per)
        H = 0.5 * (H + H.T)
    return ContrastValue(value, grad, H)


_OBJECTIVES = ("W1", "W2", "H1_full", "H2_full")


def scalar_objective(which: str, model: ModelSpec, lm: LocalMeanSeries, *, Lambda=None,
                     alpha=None, k_used=None, eff=None):
    """Return ``theta -> objective`` for the parameter block of ``which``."""
    if which == "W1":
        return lambda t: W1(model, t, Lambda, lm, k_used, eff)
    if which == "W2":
        return lambda t: W2(model, t, lm, k_used)
    if which == "H1_full":
        return lambda t: H1_full(model, t, Lambda, lm, eff)
    if which == "H2_full":
        return lambda t: H2_full(model, t, alpha, lm)
    raise ValueError(f"unknown objective {which!r}; expected one of {_OBJECTIVES}")


def contrast_derivatives(which: str, theta, *, model: ModelSpec, lm: LocalMeanSeries,
                         Lambda=None, alpha=None, k_used=None,
                         eff: Optional[EffectiveDiffusion] = None,
                         space: Optional[ParamSpace] = None, method: str = "auto",
                         hessian: bool = True) -> ContrastValue:
    """Value, gradient and (optionally) Hessian of one objective.

    ``method="analytic"`` chains the model's analytic parameter derivatives
    through the objective; ``method="fd"`` differences the scalar objective
    (gradient step ``1e-6 (1+|theta|)``, Hessian step ``1e-4 (1+|theta|)``).
    ``"auto"`` picks analytic whenever the model supplies the derivatives.
    """
    theta = np.asarray(theta, dtype=float)
    alpha_block = which in ("W1", "H1_full")
    if method == "auto":
        has = model.has_alpha_derivatives if alpha_block else model.has_beta_derivatives
        method = "analytic" if has else "fd"
    if method == "analytic":
        if which == "W1":
            return _w1_analytic(model, theta, Lambda, lm, k_used, eff, space, hessian)
        if which == "W2":
            return _w2_analytic(model, theta, lm, k_used, space, hessian)
        if which == "H1_full":
            return _h1_analytic(model, theta, Lambda, lm, eff, space, hessian)
        if which == "H2_full":
            return _h2_analytic(model, theta, alpha, lm, space, hessian)
        raise ValueError(f"unknown objective {which!r}")
    if method != "fd":
        raise ValueError(f"unknown derivative method {method!r}")
    f = scalar_objective(which, model, lm, Lambda=Lambda, alpha=alpha, k_used=k_used, eff=eff)
    return ContrastValue(
        f(theta), fd_gradient(f, theta, space), fd_hessian(f, theta) if hessian else None
    )
