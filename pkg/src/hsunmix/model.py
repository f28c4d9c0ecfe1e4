"""Linear mixing model primitives shared by all solvers.

A hyperspectral image with L bands and N pixels is stored as an L x N
nonnegative matrix whose n-th column is the spectrum of pixel n.  Endmember
signatures are the columns of an L x K matrix; per-pixel abundances are the
columns of a K x N matrix that live on the probability simplex whenever a
sum-to-one enforcing operation produced them.

Every container copies its input and is immutable afterwards; the
operations below are pure functions, so the whole module is safe to use
from multiple threads without coordination.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import DegenerateColumnError, ShapeError

# Additive guard for denominators of multiplicative update ratios, which
# divide by products of current iterates that may reach 0.
DENOM_GUARD = 1e-12

LOSS_KINDS = ("frobenius", "l21", "correntropy")


def _clean_matrix(data, name, allow_negative=False):
    arr = np.array(data, dtype=np.float64, order="C", copy=True)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    if not allow_negative and (arr < 0).any():
        raise ValueError(f"{name} must be entrywise nonnegative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HyperCube:
    """L x N pixel-spectra matrix with its pixel-grid and band metadata.

    Parameters
    ----------
    data : (L, N) array_like
        Reflectance values, one column per pixel.  Pixel n sits at grid
        position (n // cols, n % cols).
    rows, cols : int
        Pixel-grid dimensions; rows * cols must equal N.
    band_ids : sequence of int, optional
        Retained original band indices (1-based, matching removal lists).
        Defaults to 1..L.
    wavelengths : sequence of float, optional
        Per-band wavelength in nm.
    allow_negative : bool
        Noise injection may push entries slightly below zero when clamping
        is disabled; pass True only in that case.
    """

    data: np.ndarray
    rows: int
    cols: int
    band_ids: tuple = None
    wavelengths: tuple = None
    allow_negative: InitVar[bool] = False

    def __post_init__(self, allow_negative):
        arr = _clean_matrix(self.data, "cube data", allow_negative=allow_negative)
        L, N = arr.shape
        if self.rows <= 0 or self.cols <= 0 or self.rows * self.cols != N:
            raise ShapeError(
                f"pixel grid {self.rows}x{self.cols} does not match N={N}"
            )
        ids = self.band_ids
        ids = tuple(range(1, L + 1)) if ids is None else tuple(int(i) for i in ids)
        if len(ids) != L:
            raise ShapeError(f"band_ids has {len(ids)} entries for L={L} bands")
        wl = self.wavelengths
        if wl is not None:
            wl = tuple(float(w) for w in wl)
            if len(wl) != L:
                raise ShapeError(f"wavelengths has {len(wl)} entries for L={L}")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "band_ids", ids)
        object.__setattr__(self, "wavelengths", wl)

    @property
    def n_bands(self):
        return self.data.shape[0]

    @property
    def n_pixels(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class EndmemberMatrix:
    """L x K matrix of endmember signatures, one column per material."""

    data: np.ndarray
    names: tuple = None

    def __post_init__(self):
        arr = _clean_matrix(self.data, "endmember matrix")
        L, K = arr.shape
        if K > L:
            raise ShapeError(f"K={K} endmembers exceed L={L} bands")
        names = self.names
        names = (
            tuple(f"EM{k + 1}" for k in range(K))
            if names is None
            else tuple(str(n) for n in names)
        )
        if len(names) != K:
            raise ShapeError(f"{len(names)} names for K={K} endmembers")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "names", names)

    @property
    def n_endmembers(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class AbundanceMatrix:
    """K x N matrix of per-pixel abundance fractions."""

    data: np.ndarray

    def __post_init__(self):
        arr = _clean_matrix(self.data, "abundance matrix")
        object.__setattr__(self, "data", arr)

    @property
    def n_endmembers(self):
        return self.data.shape[0]

    @property
    def n_pixels(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class LossKind:
    """Reconstruction loss selector.

    kind is one of "frobenius" (half squared Frobenius norm), "l21" (sum of
    band-residual row norms) or "correntropy" (negative Gaussian kernel sum
    over band residuals, which needs a bandwidth sigma in the same units as
    the reflectance residual).
    """

    kind: str
    sigma: float = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}; pick from {LOSS_KINDS}")
        if self.kind == "correntropy":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("correntropy loss requires sigma > 0")


def as_matrix(x):
    """Return the underlying float64 ndarray of a container or array-like."""
    if isinstance(x, (HyperCube, EndmemberMatrix, AbundanceMatrix)):
        return x.data
    return np.asarray(x, dtype=np.float64)


def reconstruct(M, A):
    """Mix endmembers M (L x K) with abundances A (K x N) into an L x N image."""
    Md, Ad = as_matrix(M), as_matrix(A)
    if Md.ndim != 2 or Ad.ndim != 2 or Md.shape[1] != Ad.shape[0]:
        raise ShapeError(
            f"inner dimensions disagree: M is {Md.shape}, A is {Ad.shape}"
        )
    return Md @ Ad

def loss(X, Xhat, kind, sigma=None):
    """Evaluate a reconstruction loss between X and its approximation Xhat.

    kind may be a LossKind or one of the names in LOSS_KINDS; sigma is only
    consulted for correntropy when kind is given by name.  The correntropy
    value lies in [-L, 0] and equals -L exactly at zero residual.
    """
    if not isinstance(kind, LossKind):
        kind = LossKind(str(kind), sigma)
    Xd, Xh = as_matrix(X), as_matrix(Xhat)
    if Xd.shape != Xh.shape:
        raise ShapeError(f"shape mismatch: {Xd.shape} vs {Xh.shape}")
    R = Xd - Xh
    if kind.kind == "frobenius":
        return 0.5 * float(np.sum(R * R))
    row_sq = np.sum(R * R, axis=1)
    if kind.kind == "l21":
        return float(np.sum(np.sqrt(row_sq)))
    return float(-np.sum(np.exp(-row_sq / kind.sigma**2)))


def project_sum_to_one(A):
    """Rescale every abundance column onto the probability simplex.

    Idempotent, preserves each column's argmax, and refuses all-zero
    columns (there is no direction to scale them along).
    """
    Ad = as_matrix(A)
    if (Ad < 0).any():
        raise ValueError("abundances must be nonnegative before projection")
    sums = Ad.sum(axis=0)
    bad = np.flatnonzero(sums <= 0)
    if bad.size:
        raise DegenerateColumnError(
            f"cannot normalize all-zero abundance column(s) {bad[:5].tolist()}"
        )
    out = Ad / sums
    if isinstance(A, AbundanceMatrix):
        return AbundanceMatrix(out)
    return out


def default_asc_delta(X):
    """Sum-to-one augmentation weight scaled to the data magnitude."""
    return 15.0 * float(np.mean(as_matrix(X)))


def augment_asc(X, M, delta=None):
    """Append a constant pseudo-band of value delta to X and M.

    Least-squares pressure on the extra band pushes abundance column sums
    toward 1, which imposes the full additivity constraint inside plain
    nonnegative least-squares or NMF iterations without touching the
    update rules themselves.
    """
    Xd, Md = as_matrix(X), as_matrix(M)
    if delta is None:
        delta = default_asc_delta(Xd)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    Xa = np.vstack([Xd, np.full((1, Xd.shape[1]), float(delta))])
    Ma = np.vstack([Md, np.full((1, Md.shape[1]), float(delta))])
    return Xa, Ma
