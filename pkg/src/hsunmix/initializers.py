"""Geometric endmember extraction and supervised abundance estimation.

vca() picks pure-pixel candidates by repeatedly projecting the pixel cloud
onto directions orthogonal to the simplex spanned so far and taking the
projection extreme.  fcls() solves the per-pixel least-squares problem
under nonnegativity and sum-to-one constraints.  Together they provide the
standard initialization for the iterative solvers and the supervised
primitive used by ground-truth labeling.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as la
from scipy.optimize import nnls

from .errors import DegenerateSubspaceError, ShapeError
from .model import AbundanceMatrix, EndmemberMatrix, as_matrix, augment_asc


def _estimate_snr_db(Y, K):
    """Projection-based SNR estimate in dB; None when degenerate."""
    L, N = Y.shape
    mean = Y.mean(axis=1, keepdims=True)
    Yo = Y - mean
    U = la.svd(Yo @ Yo.T / N, full_matrices=False)[0][:, :K]
    proj = U.T @ Yo
    p_y = float(np.sum(Y * Y)) / N
    p_x = float(np.sum(proj * proj)) / N + float(np.sum(mean * mean))
    num = p_x - (K / L) * p_y
    den = p_y - p_x
    if num <= 0 or den <= 1e-12 * p_y:
        return None
    return 10.0 * np.log10(num / den)


def vca(X, K, seed=0):
    """Vertex component analysis endmember extraction.

    Parameters
    ----------
    X : HyperCube or (L, N) array
    K : int
        Number of endmembers, 2 <= K <= min(L, N).
    seed : int
        Drives the random projection directions; the same seed always
        returns the same selection.

    Returns
    -------
    (EndmemberMatrix, ndarray of int)
        K actual pixel spectra of X and their pixel indices.  Ties in the
        projection extreme go to the lowest pixel index.
    """
    Y = as_matrix(X)
    L, N = Y.shape
    if K < 2 or K > min(L, N):
        raise ShapeError(f"K={K} out of range for L={L}, N={N}")

    sv = la.svd(Y, compute_uv=False)
    rank = int(np.sum(sv > sv[0] * max(L, N) * np.finfo(float).eps))
    if rank < K:
        raise DegenerateSubspaceError(
            f"pixel cloud spans only {rank} dimensions, need {K}"
        )

    rng = np.random.default_rng(seed)
    snr_db = _estimate_snr_db(Y, K)
    snr_threshold = 15.0 + 10.0 * np.log10(K)

    if snr_db is None or snr_db < snr_threshold:
        # Zero-mean PCA to K-1 dims lifted back with a constant coordinate.
        # Also the fallback when the SNR estimate is degenerate (e.g. on
        # noise-free data the residual power vanishes).
        mean = Y.mean(axis=1, keepdims=True)
        Yo = Y - mean
        U = la.svd(Yo @ Yo.T / N, full_matrices=False)[0][:, : K - 1]
        x = U.T @ Yo
        c = np.sqrt(np.max(np.sum(x * x, axis=0)))
        y = np.vstack([x, np.full((1, N), c)])
    else:
        # High SNR: project onto the K-dim signal subspace and normalize
        # each pixel projectively against the mean direction.
        U = la.svd(Y @ Y.T / N, full_matrices=False)[0][:, :K]
        x = U.T @ Y
        u = x.mean(axis=1, keepdims=True)
        denom = np.sum(x * u, axis=0)
        denom[denom == 0] = np.finfo(float).tiny
        y = x / denom

    indices = np.zeros(K, dtype=int)
    A = np.zeros((K, K))
    A[-1, 0] = 1.0
    for i in range(K):
        w = rng.random((K, 1))
        f = w - A @ (la.pinv(A) @ w)
        norm = np.sqrt(np.sum(f * f))
        if norm == 0:
            raise DegenerateSubspaceError("projection direction collapsed to zero")
        f /= norm
        v = (f.T @ y).ravel()
        indices[i] = int(np.argmax(np.abs(v)))
        A[:, i] = y[:, indices[i]]

    M = EndmemberMatrix(Y[:, indices])
    return M, indices


def _polish_sum_to_one(Md, x, a):
    """Exactly re-solve on the positive support with the sum pinned to 1."""
    support = np.flatnonzero(a > 0)
    if support.size == 0:
        support = np.arange(Md.shape[1])
    for _ in range(Md.shape[1]):
        Ms = Md[:, support]
        k = support.size
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = Ms.T @ Ms
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.concatenate([Ms.T @ x, [1.0]])
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
        if (sol >= 0).all() or support.size == 1:
            out = np.zeros_like(a)
            out[support] = np.maximum(sol, 0.0)
            return out
        support = support[sol > 0]
    out = np.zeros_like(a)
    out[support] = 1.0 / support.size
    return out


def fcls(X, M, delta=None):
    """Fully constrained least-squares abundance estimation.

    Solves min ||x - M a||^2 subject to a >= 0 and sum(a) = 1 for every
    pixel.  The sum constraint is imposed by the constant-pseudo-band
    augmentation and a nonnegative least-squares solve per pixel, after
    which the solution is re-solved exactly on its positive support so the
    equality holds to machine precision.

    Parameters
    ----------
    X : HyperCube or (L, N) array
    M : EndmemberMatrix or (L, K) array
    delta : float, optional
        Augmentation weight; defaults to 15 x mean of X.

    Returns
    -------
    AbundanceMatrix
    """
    Xd, Md = as_matrix(X), as_matrix(M)
    if Xd.ndim != 2 or Md.ndim != 2 or Xd.shape[0] != Md.shape[0]:
        raise ShapeError(f"X is {Xd.shape} but M is {Md.shape}")
    L, N = Xd.shape
    K = Md.shape[1]
    if K > L + 1:
        warnings.warn(
            f"K={K} endmembers exceed L+1={L + 1}: the per-pixel solve is "
            "underdetermined",
            RuntimeWarning,
        )
    ridge = None
    if np.linalg.matrix_rank(Md) < K:
        warnings.warn(
            "endmember matrix is rank deficient; adding a small ridge",
            RuntimeWarning,
        )
        ridge = np.sqrt(1e-10 * max(float(np.sum(Md * Md)), 1.0))

    Xa, Ma = augment_asc(Xd, Md, delta)
    if ridge is not None:
        Xa = np.vstack([Xa, np.zeros((K, N))])
        Ma = np.vstack([Ma, ridge * np.eye(K)])

    A = np.empty((K, N))
    for n in range(N):
        a = nnls(Ma, Xa[:, n])[0]
        A[:, n] = _polish_sum_to_one(Md, Xd[:, n], a)
    return AbundanceMatrix(A)


def init_pair(X, K, seed=0):
    """VCA endmembers plus their FCLS abundances, reproducible per seed."""
    M, _ = vca(X, K, seed)
    A = fcls(X, M)
    return M, A
