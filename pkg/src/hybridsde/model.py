"""Model structure: drift, diffusion, parameter boxes and derivatives.

Model callables are vectorised over leading axes. ``drift(x, beta)`` maps
``x`` of shape ``(..., d)`` to ``(..., d)`` and ``diffusion(x, alpha)`` maps it
to ``(..., d, r)``. Optional analytic derivatives put the parameter axes right
after the batch axes:

=================  ==========================
``dA_dalpha``      ``(..., m1, d, d)``
``d2A_dalpha2``    ``(..., m1, m1, d, d)``
``db_dbeta``       ``(..., m2, d)``
``d2b_dbeta2``     ``(..., m2, m2, d)``
=================  ==========================

Callables must be stateless; a ``ModelSpec`` is shared freely between
threads and worker processes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numba
import numpy as np

from .errors import ConfigError, ModelEvaluationError

FD_STEP = 1e-6
FD_STEP_NESTED = 1e-4


@dataclass(frozen=True)
class ParamSpace:
    """Axis-aligned parameter box ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigError("lower and upper must be 1-d arrays of equal length")
        if not np.all(lo < hi):
            raise ConfigError("ParamSpace requires lower < upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lo: float, hi: float, m: int) -> "ParamSpace":
        return cls(np.full(m, lo), np.full(m, hi))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def clip(self, theta) -> np.ndarray:
        return np.clip(np.asarray(theta, dtype=float), self.lower, self.upper)


@dataclass(frozen=True)
class ModelSpec:
    """Drift/diffusion pair with dimensions and optional analytic derivatives.

    ``nb_drift(x, beta, out)`` and ``nb_diffusion(x, alpha, out)`` are optional
    numba-compiled scalar kernels used by the path simulator; without them the
    simulator falls back to a pure-Python Euler loop.
    """

    d: int
    r: int
    m1: int
    m2: int
    drift: Callable
    diffusion: Callable
    dA_dalpha: Optional[Callable] = None
    d2A_dalpha2: Optional[Callable] = None
    db_dbeta: Optional[Callable] = None
    d2b_dbeta2: Optional[Callable] = None
    name: str = "custom"
    nb_drift: Optional[Callable] = field(default=None, repr=False)
    nb_diffusion: Optional[Callable] = field(default=None, repr=False)

    @property
    def has_alpha_derivatives(self) -> bool:
        return self.dA_dalpha is not None and self.d2A_dalpha2 is not None

    @property
    def has_beta_derivatives(self) -> bool:
        return self.db_dbeta is not None and self.d2b_dbeta2 is not None


def eval_A(spec: ModelSpec, x, alpha) -> np.ndarray:
    """Return ``A = a a^T`` at ``x`` (shape ``(..., d, d)``), symmetrised."""
    alpha = np.asarray(alpha, dtype=float)
    a = np.asarray(spec.diffusion(np.asarray(x, dtype=float), alpha), dtype=float)
    A = a @ np.swapaxes(a, -1, -2)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    if not np.all(np.isfinite(A)):
        raise ModelEvaluationError("model evaluation error: non-finite A", x=x, theta=alpha)
    return A


def eval_b(spec: ModelSpec, x, beta) -> np.ndarray:
    """Return the drift at ``x`` (shape ``(..., d)``)."""
    beta = np.asarray(beta, dtype=float)
    b = np.asarray(spec.drift(np.asarray(x, dtype=float), beta), dtype=float)
    if not np.all(np.isfinite(b)):
        raise ModelEvaluationError("model evaluation error: non-finite drift", x=x, theta=beta)
    return b


def _steps(theta, rel, space):
    """Per-coordinate offsets (minus, plus) that stay inside ``space``."""
    eps = rel * (1.0 + np.abs(theta))
    plus = eps.copy()
    minus = eps.copy()
    if space is not None:
        over = theta + eps > space.upper
        under = theta - eps < space.lower
        # one-sided near a face
        plus[over] = 0.0
        minus[over] = 2 * eps[over]
        minus[under & ~over] = 0.0
        plus[under & ~over] = 2 * eps[under & ~over]
    return minus, plus


def fd_param_jacobian(f, theta, core_ndim: int, rel: float = FD_STEP, space=None) -> np.ndarray:
    """Finite-difference derivative of ``f(theta)`` in every coordinate.

    ``f`` returns ``batch + core`` shaped arrays; the parameter axis is
    inserted in front of the ``core_ndim`` trailing axes. Central differences
    unless the stencil would leave ``space``.
    """
    theta = np.asarray(theta, dtype=float)
    minus, plus = _steps(theta, rel, space)
    cols = []
    for i in range(theta.size):
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += plus[i]
        tm[i] -= minus[i]
        cols.append((np.asarray(f(tp)) - np.asarray(f(tm))) / (plus[i] + minus[i]))
    out = np.stack(cols, axis=0)
    # move the parameter axis from the front to just before the core axes
    return np.moveaxis(out, 0, out.ndim - 1 - core_ndim)


_WHICH = ("dA_dalpha", "d2A_dalpha2", "d3A_dalpha3", "db_dbeta", "d2b_dbeta2", "d3b_dbeta3")


def derivative(spec: ModelSpec, which: str, x, theta, space: Optional[ParamSpace] = None) -> np.ndarray:
    """Parameter derivatives of ``A`` or ``b``.

    Analytic callables on the ModelSpec are used when present; otherwise central
    finite differences with step ``1e-6 * (1 + |theta_i|)``, or
    ``1e-4 * (1 + |theta_i|)`` when differencing a quantity that is itself a
    finite difference. Third derivatives always difference the second.
    """
    if which not in _WHICH:
        raise ValueError(f"unknown derivative {which!r}; expected one of {_WHICH}")
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if "A_dalpha" in which:
        order = {"dA_dalpha": 1, "d2A_dalpha2": 2, "d3A_dalpha3": 3}[which]
        base = lambda t: eval_A(spec, x, t)
        analytic = [spec.dA_dalpha, spec.d2A_dalpha2]
        core0 = 2
    else:
        order = {"db_dbeta": 1, "d2b_dbeta2": 2, "d3b_dbeta3": 3}[which]
        base = lambda t: eval_b(spec, x, t)
        analytic = [spec.db_dbeta, spec.d2b_dbeta2]
        core0 = 1
    return _nth(order, base, analytic, core0, x, theta, space)


def _nth(order, base, analytic, core0, x, theta, space):
    if order <= 2 and analytic[order - 1] is not None:
        return np.asarray(analytic[order - 1](x, theta), dtype=float)
    if order == 1:
        return fd_param_jacobian(base, theta, core0, FD_STEP, space)
    lower = lambda t: _nth(order - 1, base, analytic, core0, x, t, space)
    lower_is_fd = order - 1 > 2 or analytic[order - 2] is None
    rel = FD_STEP_NESTED if lower_is_fd else FD_STEP
    return fd_param_jacobian(lower, theta, core0 + order - 1, rel, space)


# ---------------------------------------------------------------------------
# built-in models


def _p3_drift(x, beta):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return np.stack(
        [
            1 - beta[0] * x1 - 10 * np.sin(beta[1] * x2**2),
            1 - beta[2] * x2 - 10 * np.sin(beta[3] * x3**2),
            1 - beta[4] * x3 - 10 * np.sin(beta[5] * x1**2),
        ],
        axis=-1,
    )


def _p3_c(x):
    # diagonal entries of A per unit alpha, ordered as the diffusion rows
    return np.stack(
        [2 + np.cos(x[..., 2] ** 2), 2 + np.cos(x[..., 0] ** 2), 2 + np.cos(x[..., 1] ** 2)],
        axis=-1,
    )


def _p3_diffusion(x, alpha):
    c = _p3_c(x)
    out = np.zeros(c.shape + (3,))
    idx = np.arange(3)
    out[..., idx, idx] = np.sqrt(alpha * c)
    return out


def _p3_dA(x, alpha):
    c = _p3_c(x)
    out = np.zeros(c.shape[:-1] + (3, 3, 3))
    for k in range(3):
        out[..., k, k, k] = c[..., k]
    return out


def _p3_d2A(x, alpha):
    return np.zeros(np.shape(x)[:-1] + (3, 3, 3, 3))


def _p3_db(x, beta):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    out = np.zeros(np.shape(x)[:-1] + (6, 3))
    out[..., 0, 0] = -x1
    out[..., 1, 0] = -10 * np.cos(beta[1] * x2**2) * x2**2
    out[..., 2, 1] = -x2
    out[..., 3, 1] = -10 * np.cos(beta[3] * x3**2) * x3**2
    out[..., 4, 2] = -x3
    out[..., 5, 2] = -10 * np.cos(beta[5] * x1**2) * x1**2
    return out


def _p3_d2b(x, beta):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    out = np.zeros(np.shape(x)[:-1] + (6, 6, 3))
    out[..., 1, 1, 0] = 10 * np.sin(beta[1] * x2**2) * x2**4
    out[..., 3, 3, 1] = 10 * np.sin(beta[3] * x3**2) * x3**4
    out[..., 5, 5, 2] = 10 * np.sin(beta[5] * x1**2) * x1**4
    return out


@numba.njit(cache=True)
def _p3_nb_drift(x, beta, out):
    out[0] = 1 - beta[0] * x[0] - 10 * np.sin(beta[1] * x[1] ** 2)
    out[1] = 1 - beta[2] * x[1] - 10 * np.sin(beta[3] * x[2] ** 2)
    out[2] = 1 - beta[4] * x[2] - 10 * np.sin(beta[5] * x[0] ** 2)


@numba.njit(cache=True)
def _p3_nb_diffusion(x, alpha, out):
    out[:, :] = 0.0
    out[0, 0] = np.sqrt(alpha[0] * (2 + np.cos(x[2] ** 2)))
    out[1, 1] = np.sqrt(alpha[1] * (2 + np.cos(x[0] ** 2)))
    out[2, 2] = np.sqrt(alpha[2] * (2 + np.cos(x[1] ** 2)))


def _ou_drift(x, beta):
    return -beta[0] * x


def _ou_diffusion(x, alpha):
    return np.broadcast_to(np.sqrt(alpha[0]), np.shape(x)[:-1] + (1, 1)).copy()


def _ou_dA(x, alpha):
    return np.ones(np.shape(x)[:-1] + (1, 1, 1))


def _ou_d2A(x, alpha):
    return np.zeros(np.shape(x)[:-1] + (1, 1, 1, 1))


def _ou_db(x, beta):
    return -np.asarray(x)[..., None, :]


def _ou_d2b(x, beta):
    return np.zeros(np.shape(x)[:-1] + (1, 1, 1))


@numba.njit(cache=True)
def _ou_nb_drift(x, beta, out):
    out[0] = -beta[0] * x[0]


@numba.njit(cache=True)
def _ou_nb_diffusion(x, alpha, out):
    out[0, 0] = np.sqrt(alpha[0])


PAPER_3D = ModelSpec(
    d=3, r=3, m1=3, m2=6,
    drift=_p3_drift, diffusion=_p3_diffusion,
    dA_dalpha=_p3_dA, d2A_dalpha2=_p3_d2A, db_dbeta=_p3_db, d2b_dbeta2=_p3_d2b,
    name="paper-3d", nb_drift=_p3_nb_drift, nb_diffusion=_p3_nb_diffusion,
)

OU_1D = ModelSpec(
    d=1, r=1, m1=1, m2=1,
    drift=_ou_drift, diffusion=_ou_diffusion,
    dA_dalpha=_ou_dA, d2A_dalpha2=_ou_d2A, db_dbeta=_ou_db, d2b_dbeta2=_ou_d2b,
    name="ou-1d", nb_drift=_ou_nb_drift, nb_diffusion=_ou_nb_diffusion,
)


@dataclass(frozen=True)
class RegisteredModel:
    """A named model with its parameter boxes and reference truth."""

    spec: ModelSpec
    alpha_space: ParamSpace
    beta_space: ParamSpace
    alpha_true: np.ndarray
    beta_true: np.ndarray
    x0: np.ndarray
    Lambda_true: np.ndarray


REGISTRY = {
    "paper-3d": RegisteredModel(
        spec=PAPER_3D,
        alpha_space=ParamSpace.cube(0.01, 10.0, 3),
        beta_space=ParamSpace.cube(0.01, 10.0, 6),
        alpha_true=np.array([1.0, 2.0, 3.0]),
        beta_true=np.array([1.0, 2.0, 2.0, 3.0, 3.0, 4.0]),
        x0=np.ones(3),
        Lambda_true=1e-3 * np.eye(3),
    ),
    "ou-1d": RegisteredModel(
        spec=OU_1D,
        alpha_space=ParamSpace.cube(0.01, 10.0, 1),
        beta_space=ParamSpace.cube(0.01, 10.0, 1),
        alpha_true=np.array([1.0]),
        beta_true=np.array([1.0]),
        x0=np.zeros(1),
        Lambda_true=1e-3 * np.eye(1),
    ),
}


def get_model(name: str) -> RegisteredModel:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; known: {sorted(REGISTRY)}") from None
