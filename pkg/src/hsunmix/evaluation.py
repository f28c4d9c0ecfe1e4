"""Unmixing quality metrics and endmember alignment.

Estimated endmembers come back in arbitrary column order, so reports
first align them to the reference by the spectral-angle-optimal
assignment and then score abundances along the same permutation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ShapeError
from .model import as_matrix

# Exhaustive lexicographic matching is exact and cheap up to this K;
# beyond it the Hungarian assignment takes over.
_BRUTE_FORCE_LIMIT = 8


def sad(m, m_hat):
    """Spectral angle distance between two spectra, in radians [0, pi].

    Invariant to positive rescaling of either argument.
    """
    a = np.asarray(m, dtype=np.float64).ravel()
    b = np.asarray(m_hat, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"spectra lengths differ: {a.size} vs {b.size}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("spectral angle of a zero vector is undefined")
    cos = float(np.dot(a, b)) / (na * nb)
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def rmse(a, a_hat):
    """Root mean square error between two abundance rows."""
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(a_hat, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ShapeError(f"row lengths differ: {x.size} vs {y.size}")
    return float(np.sqrt(np.mean((x - y) ** 2)))


def _sad_cost_matrix(M_ref, M_est):
    K = M_ref.shape[1]
    cost = np.empty((K, K))
    for i in range(K):
        for j in range(K):
            cost[i, j] = sad(M_ref[:, i], M_est[:, j])
    return cost


def match_endmembers(M_ref, M_est):
    """Assignment of estimated to reference endmembers minimizing total SAD.

    Returns perm such that estimated column perm[i] corresponds to
    reference column i.  Up to K = 8 all permutations are enumerated in
    lexicographic order and the first minimum wins, which makes
    tie-breaking deterministic; larger K uses the Hungarian algorithm.
    """
    Mr, Me = as_matrix(M_ref), as_matrix(M_est)
    if Mr.shape != Me.shape:
        raise ShapeError(f"endmember shapes differ: {Mr.shape} vs {Me.shape}")
    K = Mr.shape[1]
    cost = _sad_cost_matrix(Mr, Me)
    if K <= _BRUTE_FORCE_LIMIT:
        best, best_total = None, math.inf
        for perm in itertools.permutations(range(K)):
            total = sum(cost[i, perm[i]] for i in range(K))
            if total < best_total:
                best, best_total = perm, total
        return np.asarray(best, dtype=int)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(K, dtype=int)
    perm[rows] = cols
    return perm


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-endmember and mean scores of one estimate against a reference."""

    names: tuple
    sad_values: tuple
    rmse_values: tuple
    mean_sad: float
    mean_rmse: float
    permutation: tuple
    abundances_projected: bool = True
    stats: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def _unpack_pair(obj):
    if isinstance(obj, (tuple, list)) and len(obj) == 2:
        return as_matrix(obj[0]), as_matrix(obj[1])
    return as_matrix(obj.M), as_matrix(obj.A)


def evaluate(gt, est, names=None, stats=None, provenance=None):
    """Score an estimated (M, A) pair against ground truth.

    Endmembers are matched by minimum total spectral angle; abundance
    rows are aligned along the same permutation and scored after a single
    simplex projection of the estimated columns (recorded on the report).
    The result is invariant to a simultaneous column permutation of the
    estimated M and row permutation of the estimated A.
    """
    M_gt, A_gt = _unpack_pair(gt)
    M_est, A_est = _unpack_pair(est)
    if M_gt.shape != M_est.shape or A_gt.shape != A_est.shape:
        raise ShapeError("ground truth and estimate shapes differ")
    K = M_gt.shape[1]

    if names is None:
        gt_m = gt[0] if isinstance(gt, (tuple, list)) else gt.M
        names = tuple(getattr(gt_m, "names", None) or (f"EM{k + 1}" for k in range(K)))

    sums = A_est.sum(axis=0)
    ok = sums > 0
    A_proj = A_est.copy()
    A_proj[:, ok] = A_est[:, ok] / sums[ok]

    perm = match_endmembers(M_gt, M_est)
    sad_values = tuple(sad(M_gt[:, k], M_est[:, perm[k]]) for k in range(K))
    rmse_values = tuple(rmse(A_gt[k], A_proj[perm[k]]) for k in range(K))
    return BenchmarkReport(
        names=tuple(names),
        sad_values=sad_values,
        rmse_values=rmse_values,
        mean_sad=float(np.mean(sad_values)),
        mean_rmse=float(np.mean(rmse_values)),
        permutation=tuple(int(p) for p in perm),
        abundances_projected=True,
        stats=dict(stats or {}),
        provenance=dict(provenance or {}),
    )
