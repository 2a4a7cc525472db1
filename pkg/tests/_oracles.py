"""Independent reference implementations used as test oracles."""
import numpy as np

from hybridsde.model import ModelSpec


def p3_c(x):
    return np.stack([2 + np.cos(x[:, 2] ** 2), 2 + np.cos(x[:, 0] ** 2), 2 + np.cos(x[:, 1] ** 2)], axis=1)


def p3_b(x, beta):
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    return np.stack([
        1 - beta[0] * x1 - 10 * np.sin(beta[1] * x2 ** 2),
        1 - beta[2] * x2 - 10 * np.sin(beta[3] * x3 ** 2),
        1 - beta[4] * x3 - 10 * np.sin(beta[5] * x1 ** 2),
    ], axis=1)


def p3_db(x, beta):
    """(K, 6, 3) drift Jacobian written out by hand."""
    x1, x2, x3 = x[:, 0], x[:, 1], x[:, 2]
    J = np.zeros((x.shape[0], 6, 3))
    J[:, 0, 0] = -x1
    J[:, 1, 0] = -10 * np.cos(beta[1] * x2 ** 2) * x2 ** 2
    J[:, 2, 1] = -x2
    J[:, 3, 1] = -10 * np.cos(beta[3] * x3 ** 2) * x3 ** 2
    J[:, 4, 2] = -x3
    J[:, 5, 2] = -10 * np.cos(beta[5] * x1 ** 2) * x1 ** 2
    return J


def blocks(ybar, K):
    return ybar[: K - 2], ybar[2:K] - ybar[1 : K - 1]


def p3_grad_W1(ybar, K, delta, alpha, lam_diag, coef=3.0):
    """A is diagonal: A_ii = alpha_i c_i(x); Lambda diagonal."""
    x, D = blocks(ybar, K)
    c = p3_c(x)
    g = np.zeros(3)
    for i in range(3):
        R_ii = D[:, i] ** 2 / delta - (2 / 3) * (alpha[i] * c[:, i] + coef * lam_diag[i])
        g[i] = (2 / 3) * np.sum(R_ii * c[:, i])
    return g


def p3_grad_W2(ybar, K, delta, beta):
    x, D = blocks(ybar, K)
    r = D - delta * p3_b(x, beta)
    return np.einsum("ka,kia->i", r, p3_db(x, beta))


def p3_grad_H1(ybar, K, delta, alpha, lam_diag, coef=3.0):
    x, D = blocks(ybar, K)
    c = p3_c(x)
    s = 1.5 / delta
    g = np.zeros(3)
    for i in range(3):
        M = alpha[i] * c[:, i] + coef * lam_diag[i]
        g[i] = 0.5 * np.sum(s * D[:, i] ** 2 * c[:, i] / M ** 2 - c[:, i] / M)
    return g


def p3_grad_H2(ybar, K, delta, beta, alpha):
    x, D = blocks(ybar, K)
    A = alpha[None, :] * p3_c(x)
    r = D - delta * p3_b(x, beta)
    return np.einsum("ka,kia->i", r / A, p3_db(x, beta))


def const_diffusion_model():
    """d = 1, A = alpha, b = beta (constant drift)."""
    return ModelSpec(
        d=1, r=1, m1=1, m2=1,
        drift=lambda x, b: np.broadcast_to(b[0], np.shape(x)).astype(float),
        diffusion=lambda x, a: np.full(np.shape(x)[:-1] + (1, 1), np.sqrt(a[0])),
        dA_dalpha=lambda x, a: np.ones(np.shape(x)[:-1] + (1, 1, 1)),
        d2A_dalpha2=lambda x, a: np.zeros(np.shape(x)[:-1] + (1, 1, 1, 1)),
        db_dbeta=lambda x, b: np.ones(np.shape(x)[:-1] + (1, 1)),
        d2b_dbeta2=lambda x, b: np.zeros(np.shape(x)[:-1] + (1, 1, 1)),
        name="const-1d",
    )
