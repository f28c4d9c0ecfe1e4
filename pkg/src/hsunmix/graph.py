"""Pixel-neighborhood weight matrices and graph Laplacians.

The abundance regularizer Tr(A L A^T) used by the graph-constrained
solvers needs a symmetric nonnegative weight matrix W over pixels together
with its degree matrix D and Laplacian L = D - W.  Weights follow a heat
kernel on spectral distance over k nearest neighbors; the spectral-spatial
mode first restricts neighbor candidates to a window on the pixel grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ShapeError
from .model import HyperCube, as_matrix


@dataclass(frozen=True)
class GraphSpec:
    """Neighborhood construction parameters.

    mode is "spectral" (neighbors by spectrum alone) or "spectral_spatial"
    (neighbor candidates limited to grid Chebyshev distance
    <= spatial_radius before the spectral k-NN).  sigma_w is the heat
    kernel bandwidth; None selects the median neighbor distance.
    """

    mode: str = "spectral"
    k_neighbors: int = 8
    sigma_w: float = None
    spatial_radius: int = 2

    def __post_init__(self):
        if self.mode not in ("spectral", "spectral_spatial"):
            raise ValueError(f"unknown graph mode {self.mode!r}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.sigma_w is not None and not self.sigma_w > 0:
            raise ValueError("sigma_w must be positive")
        if self.spatial_radius < 1:
            raise ValueError("spatial_radius must be >= 1")


@dataclass(frozen=True)
class LaplacianPair:
    """Symmetric weight matrix W, degree vector and Laplacian L = D - W."""

    W: sp.csr_matrix
    degrees: np.ndarray
    L: sp.csr_matrix

    @property
    def n_pixels(self):
        return self.W.shape[0]


def _pairwise_sq_dists(X):
    # ||x_i - x_j||^2 via the Gram matrix; clipped against fp negatives.
    sq = np.sum(X * X, axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X.T @ X)
    np.maximum(d2, 0.0, out=d2)
    return d2

def build_graph(X, spec=GraphSpec(), rows=None, cols=None):
    """Build the k-NN heat-kernel graph of a cube's pixels.

    Parameters
    ----------
    X : HyperCube or (L, N) array
        Pixel spectra.  The spectral_spatial mode needs the pixel grid,
        taken from the HyperCube or from rows/cols.
    spec : GraphSpec

    Returns
    -------
    LaplacianPair
        W is symmetrized by the entrywise maximum, has a zero diagonal and
        row sums of L vanish to machine precision.
    """
    Xd = as_matrix(X)
    N = Xd.shape[1]
    if N < spec.k_neighbors + 1:
        raise ShapeError(
            f"need at least k_neighbors+1={spec.k_neighbors + 1} pixels, got {N}"
        )
    if spec.mode == "spectral_spatial":
        if isinstance(X, HyperCube):
            rows, cols = X.rows, X.cols
        if rows is None or cols is None:
            raise ShapeError("spectral_spatial mode needs the pixel grid shape")
        if rows * cols != N:
            raise ShapeError(f"grid {rows}x{cols} does not match N={N}")

    d2 = _pairwise_sq_dists(Xd)

    if spec.mode == "spectral_spatial":
        r = np.arange(N) // cols
        c = np.arange(N) % cols
        cheb = np.maximum(
            np.abs(r[:, None] - r[None, :]), np.abs(c[:, None] - c[None, :])
        )
        allowed = cheb <= spec.spatial_radius
    else:
        allowed = np.ones((N, N), dtype=bool)
    np.fill_diagonal(allowed, False)

    # Per-pixel k nearest allowed neighbors by spectral distance.  Ties are
    # broken toward the lower pixel index by the stable argsort.
    neighbor_rows, neighbor_cols = [], []
    blocked = np.where(allowed, d2, np.inf)
    order = np.argsort(blocked, axis=1, kind="stable")
    for i in range(N):
        cand = order[i]
        cand = cand[np.isfinite(blocked[i, cand])]
        take = cand[: spec.k_neighbors]
        neighbor_rows.extend([i] * len(take))
        neighbor_cols.extend(take.tolist())
    neighbor_rows = np.asarray(neighbor_rows, dtype=int)
    neighbor_cols = np.asarray(neighbor_cols, dtype=int)

    picked_d2 = d2[neighbor_rows, neighbor_cols]
    sigma = spec.sigma_w
    if sigma is None:
        sigma = float(np.median(np.sqrt(picked_d2)))
    if sigma <= 0:
        warnings.warn(
            "all selected neighbor distances are zero; using uniform weights",
            RuntimeWarning,
        )
        weights = np.ones_like(picked_d2)
    else:
        weights = np.exp(-picked_d2 / sigma**2)

    W = sp.coo_matrix((weights, (neighbor_rows, neighbor_cols)), shape=(N, N))
    W = W.tocsr()
    W = W.maximum(W.T)
    W.setdiag(0.0)
    W.eliminate_zeros()

    degrees = np.asarray(W.sum(axis=0)).ravel()
    L = sp.diags(degrees) - W
    return LaplacianPair(W=W, degrees=degrees, L=L.tocsr())
