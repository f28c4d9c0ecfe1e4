"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the production code paths: the
simplex-constrained least squares oracle is a projected-gradient method
(production uses augmentation + NNLS), and the simplex projection is the
sort-based exact algorithm.
"""

import numpy as np
import pytest


def project_simplex(v):
    """Euclidean projection of a vector onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, v.size + 1) > (css - 1))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def simplex_lsq_oracle(M, x, iters=20000, tol=1e-14):
    """min ||x - M a||^2 s.t. a >= 0, sum(a) = 1 by accelerated projected
    gradient (FISTA with restart)."""
    M = np.asarray(M, dtype=float)
    x = np.asarray(x, dtype=float)
    K = M.shape[1]
    a = np.full(K, 1.0 / K)
    y = a.copy()
    t = 1.0
    lip = np.linalg.norm(M.T @ M, 2)
    step = 1.0 / max(lip, 1e-12)
    for _ in range(iters):
        g = M.T @ (M @ y - x)
        a_new = project_simplex(y - step * g)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        momentum = a_new - a
        if np.dot(momentum, a_new - y) > 0:  # restart on non-descent
            y = a_new
            t_new = 1.0
        else:
            y = a_new + ((t - 1.0) / t_new) * momentum
        if np.max(np.abs(momentum)) < tol:
            return a_new
        a, t = a_new, t_new
    return a


def random_simplex_columns(rng, K, N):
    """Uniform Dirichlet(1) columns on the simplex."""
    raw = rng.gamma(1.0, 1.0, size=(K, N))
    return raw / raw.sum(axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
