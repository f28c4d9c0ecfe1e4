"""The eleven unmixing solvers under a single step/solve interface.

Every step function maps a SolverState to a new SolverState and appends
the variant's full objective value to the recorded history.  The
multiplicative family updates the endmember factor M by the classic ratio
rule and the abundance factor A by a variant-specific ratio whose extra
denominator (and sometimes numerator) terms realize the abundance
constraint; nonnegativity is preserved because every factor is multiplied
by a ratio of nonnegative quantities.  The volume-constrained variant uses
projected gradient descent with Armijo backtracking, and the
endmember-dissimilarity variant clamps negative entries after its update.

solve() wraps any variant in the iteration loop with relative-objective
stopping, optional sum-to-one augmentation of the data, divergence
detection, and a final simplex projection of the abundances.  Each solve
owns its state exclusively; concurrent solves need no coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateColumnError,
    DivergenceError,
    LineSearchStallError,
    ShapeError,
)
from .model import DENOM_GUARD, as_matrix, augment_asc

VARIANTS = (
    "nmf",
    "l1",
    "l12",
    "gnmf",
    "dgs",
    "rrlbs",
    "ssnmf",
    "glnmf",
    "cenmf",
    "mvcnmf",
    "edcnmf",
)

# Variants whose A update is a pure multiplicative ratio on the plain
# Frobenius loss; they share the classic M update.
MULTIPLICATIVE_VARIANTS = ("nmf", "l1", "l12", "gnmf", "dgs", "ssnmf", "glnmf")

GRAPH_VARIANTS = frozenset({"gnmf", "ssnmf", "glnmf"})


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by all variants.

    lam weights the abundance constraint (sparsity or graph term), alpha
    the secondary term (sparsity in ssnmf/glnmf, anchoring in labeling,
    volume/dissimilarity in mvcnmf/edcnmf).  xi conditions fractional
    powers of near-zero abundances, sigma is the correntropy bandwidth
    (None selects the root-mean residual row norm at initialization), and
    eps guards the robust channel weights.
    """

    lam: float = 0.1
    alpha: float = 0.1
    xi: float = 1e-8
    sigma: float = None
    eps: float = 1e-8
    max_iters: int = 500
    rel_tol: float = 1e-6
    armijo_step0: float = 1.0
    armijo_shrink: float = 0.5
    armijo_c: float = 1e-4
    armijo_max_shrinks: int = 50
    refresh_period: int = 30
    edc_floor: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0 or self.alpha < 0:
            raise ValueError("constraint weights must be >= 0")
        if not self.xi > 0:
            raise ValueError("xi must be > 0")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.eps > 0:
            raise ValueError("eps must be > 0")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")
        if not 0 < self.armijo_shrink < 1 or not 0 < self.armijo_c < 1:
            raise ValueError("armijo parameters must lie in (0, 1)")
        if not self.armijo_step0 > 0:
            raise ValueError("armijo_step0 must be > 0")
        if self.refresh_period < 1:
            raise ValueError("refresh_period must be >= 1")


@dataclass(frozen=True)
class SolverState:
    """Iteration state: factors, per-pixel sparsity map and channel weights.

    h holds the shared row of the rank-one pixel sparsity map (entries in
    [0, 1)); u holds the positive diagonal of the channel-weight matrix.
    Either may be None meaning "not in use" (all zeros / all ones).
    """

    M: np.ndarray
    A: np.ndarray
    h: np.ndarray = None
    u: np.ndarray = None
    iteration: int = 0
    objective_history: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "M", np.asarray(self.M, dtype=np.float64))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=np.float64))
        if self.M.ndim != 2 or self.A.ndim != 2 or self.M.shape[1] != self.A.shape[0]:
            raise ShapeError(
                f"factor shapes disagree: M {self.M.shape}, A {self.A.shape}"
            )
        if self.h is not None:
            h = np.asarray(self.h, dtype=np.float64)
            if h.shape != (self.A.shape[1],):
                raise ShapeError("h must hold one entry per pixel")
            if (h < 0).any() or (h >= 1).any():
                raise ValueError("h entries must lie in [0, 1)")
            object.__setattr__(self, "h", h)
        if self.u is not None:
            u = np.asarray(self.u, dtype=np.float64)
            if u.shape != (self.M.shape[0],):
                raise ShapeError("u must hold one entry per band")
            if (u <= 0).any():
                raise ValueError("u entries must be positive")
            object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class SolveResult:
    M: np.ndarray
    A: np.ndarray
    objective_history: list
    diagnostics: dict


def _check_finite(arr, factor, iteration):
    if not np.isfinite(arr).all():
        raise DivergenceError(factor, iteration)


def gini_sparsity(a):
    """Order-statistics sparsity of a nonnegative vector, in [0, 1).

    0 for a uniform vector, (K-1)/K for a one-hot vector; invariant to
    positive rescaling.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise ShapeError("expected a 1-D abundance vector")
    if (a < 0).any():
        raise ValueError("abundance vector must be nonnegative")
    total = a.sum()
    if total <= 0:
        raise DegenerateColumnError("the zero vector has no sparsity index")
    K = a.size
    ordered = np.sort(a) / total
    ranks = (K - np.arange(1, K + 1) + 0.5) / K
    return float(1.0 - 2.0 * np.sum(ordered * ranks))


def _gini_columns(A):
    """Column-wise Gini sparsity; all-zero columns map to 0."""
    K, N = A.shape
    sums = A.sum(axis=0)
    h = np.zeros(N)
    ok = sums > 0
    if ok.any():
        ordered = np.sort(A[:, ok], axis=0) / sums[ok]
        ranks = ((K - np.arange(1, K + 1) + 0.5) / K)[:, None]
        h[ok] = 1.0 - 2.0 * np.sum(ordered * ranks, axis=0)
    return np.clip(h, 0.0, np.nextafter(1.0, 0.0))


def _graph_products(A, graph):
    # Returns (A W, A degrees) with W symmetric sparse.
    AW = (graph.W @ A.T).T
    AD = A * graph.degrees[None, :]
    return np.asarray(AW), AD


def _laplacian_quad(A, graph):
    # Tr(A L A^T) for the sparse Laplacian.
    LA = np.asarray(graph.L @ A.T)
    return float(np.sum(A * LA.T))


def abundance_terms(
    A, X, M, variant, config, graph=None, h=None, anchor_y=None, anchor_weight=0.0
):
    """Numerator and denominator of the variant's abundance ratio update.

    anchor_y/anchor_weight add the quadratic pull toward a fixed label
    matrix used by supervised labeling: +2wY on the numerator and +2wA on
    the denominator, the split of the gradient of w*||A - Y||_F^2.
    """
    if variant not in MULTIPLICATIVE_VARIANTS:
        raise ValueError(f"no multiplicative abundance rule for {variant!r}")
    if variant in GRAPH_VARIANTS and graph is None:
        raise ValueError(f"variant {variant!r} requires a pixel graph")
    lam, alpha, xi = config.lam, config.alpha, config.xi

    num = M.T @ X
    den = (M.T @ M) @ A

    if variant in GRAPH_VARIANTS:
        AW, AD = _graph_products(A, graph)
        num = num + lam * AW
        den = den + lam * AD
    if variant == "l1":
        den = den + lam
    elif variant == "l12":
        den = den + 0.5 * lam * np.power(A + xi, -0.5)
    elif variant == "dgs":
        hrow = np.zeros(A.shape[1]) if h is None else h
        den = den + lam * (1.0 - hrow)[None, :] * np.power(A + xi, -hrow[None, :])
    elif variant == "ssnmf":
        den = den + alpha
    elif variant == "glnmf" and alpha > 0:
        den = den + 0.5 * alpha * np.power(A + xi, -0.5)

    if anchor_weight > 0.0 and anchor_y is not None:
        num = num + 2.0 * anchor_weight * anchor_y
        den = den + 2.0 * anchor_weight * A
    return num, den


def _plain_m_update(M, A, X):
    num = X @ A.T
    den = M @ (A @ A.T)
    return M * num / (den + DENOM_GUARD)


def variant_objective(M, A, X, variant, config, graph=None, h=None, u=None, pca=None):
    """Full objective value the given variant is descending."""
    R = X - M @ A
    recon = 0.5 * float(np.sum(R * R))
    lam, alpha, xi = config.lam, config.alpha, config.xi
    if variant == "nmf":
        return recon
    if variant == "l1":
        return recon + lam * float(np.sum(A))
    if variant == "l12":
        return recon + lam * float(np.sum(np.sqrt(A + xi)))
    if variant == "gnmf":
        return recon + 0.5 * lam * _laplacian_quad(A, graph)
    if variant == "dgs":
        hrow = np.zeros(A.shape[1]) if h is None else h
        return recon + lam * float(np.sum(np.power(A + xi, 1.0 - hrow[None, :])))
    if variant == "ssnmf":
        return recon + 0.5 * lam * _laplacian_quad(A, graph) + alpha * float(np.sum(A))
    if variant == "glnmf":
        return (
            recon
            + 0.5 * lam * _laplacian_quad(A, graph)
            + alpha * float(np.sum(np.sqrt(A + xi)))
        )
    row_sq = np.sum(R * R, axis=1)
    if variant == "rrlbs":
        hrow = np.zeros(A.shape[1]) if h is None else h
        smooth_l21 = float(np.sum(np.sqrt(row_sq + config.eps)))
        return smooth_l21 + lam * float(np.sum(np.power(A + xi, 1.0 - hrow[None, :])))
    if variant == "cenmf":
        sigma = config.sigma
        if sigma is None or not sigma > 0:
            raise ValueError("cenmf objective needs sigma > 0")
        return float(-np.sum(np.exp(-row_sq / sigma**2))) + 2.0 * lam * float(
            np.sum(A)
        )
    if variant == "mvcnmf":
        return mvc_objective(M, A, X, alpha, pca)
    if variant == "edcnmf":
        return recon + alpha * edc_dissimilarity(M)
    raise ValueError(f"unknown variant {variant!r}")


def multiplicative_step(state, X, variant, config, graph=None):
    """One alternating multiplicative update of M then A.

    Applies to the plain-loss family {nmf, l1, l12, gnmf, dgs, ssnmf,
    glnmf}; graph variants require the Laplacian pair, and the adaptive
    sparsity variant reads its fixed pixel map from state.h.
    """
    X = as_matrix(X)
    M_new = _plain_m_update(state.M, state.A, X)
    _check_finite(M_new, "M", state.iteration + 1)
    num, den = abundance_terms(
        state.A, X, M_new, variant, config, graph=graph, h=state.h
    )
    A_new = state.A * num / (den + DENOM_GUARD)
    _check_finite(A_new, "A", state.iteration + 1)
    obj = variant_objective(M_new, A_new, X, variant, config, graph=graph, h=state.h)
    return replace(
        state,
        M=M_new,
        A=A_new,
        iteration=state.iteration + 1,
        objective_history=state.objective_history + (obj,),
    )


def cenmf_step(state, X, config, recompute_u=True):
    """One correntropy-weighted update.

    Channel weights u_l = exp(-||residual row l||^2 / sigma^2) are
    recomputed from the current factors (unless frozen), the endmember
    ratio is unchanged by the diagonal row weighting (it cancels row-wise),
    and the abundance update uses the weighted products.
    """
    sigma = config.sigma
    if sigma is None or not sigma > 0:
        raise ValueError("cenmf needs sigma > 0 (solve() fills the default)")
    X = as_matrix(X)
    if recompute_u:
        R = X - state.M @ state.A
        row_sq = np.sum(R * R, axis=1)
        u = np.exp(-row_sq / sigma**2)
        u = np.maximum(u, np.finfo(float).tiny)
    else:
        u = np.ones(X.shape[0]) if state.u is None else state.u
    _check_finite(u, "U", state.iteration + 1)

    M_new = _plain_m_update(state.M, state.A, X)
    _check_finite(M_new, "M", state.iteration + 1)

    uX = u[:, None] * X
    uM = u[:, None] * M_new
    num = M_new.T @ uX
    den = (M_new.T @ uM) @ state.A + config.lam
    A_new = state.A * num / (den + DENOM_GUARD)
    _check_finite(A_new, "A", state.iteration + 1)

    new = replace(state, M=M_new, A=A_new, u=u, iteration=state.iteration + 1)
    obj = variant_objective(M_new, A_new, X, "cenmf", config, u=u)
    return replace(new, objective_history=state.objective_history + (obj,))


def rrlbs_step(state, X, config, recompute_u=True, refresh_h=False):
    """One robust-loss update with learned per-pixel sparsity exponents.

    Channel weights u_l = 1 / (2 sqrt(||residual row l||^2 + eps)) realize
    the row-norm loss; the abundance denominator carries the adaptive
    sparsity term; the pixel map h is refreshed to the column Gini
    sparsity when refresh_h is set (after the abundances stabilize).
    """
    X = as_matrix(X)
    if recompute_u:
        R = state.M @ state.A - X
        row_sq = np.sum(R * R, axis=1)
        u = 1.0 / (2.0 * np.sqrt(row_sq + config.eps))
    else:
        u = np.ones(X.shape[0]) if state.u is None else state.u
    _check_finite(u, "U", state.iteration + 1)

    uX = u[:, None] * X
    num_m = uX @ state.A.T
    den_m = (u[:, None] * state.M) @ (state.A @ state.A.T)
    M_new = state.M * num_m / (den_m + DENOM_GUARD)
    _check_finite(M_new, "M", state.iteration + 1)

    hrow = np.zeros(X.shape[1]) if state.h is None else state.h
    num_a = M_new.T @ uX
    den_a = (M_new.T @ (u[:, None] * M_new)) @ state.A + config.lam * (1.0 - hrow)[
        None, :
    ] * np.power(state.A + config.xi, -hrow[None, :])
    A_new = state.A * num_a / (den_a + DENOM_GUARD)
    _check_finite(A_new, "A", state.iteration + 1)

    h_new = _gini_columns(A_new) if refresh_h else state.h
    obj = variant_objective(M_new, A_new, X, "rrlbs", config, h=h_new, u=u)
    return replace(
        state,
        M=M_new,
        A=A_new,
        h=h_new,
        u=u,
        iteration=state.iteration + 1,
        objective_history=state.objective_history + (obj,),
    )


def pca_basis(X, K):
    """Top K-1 principal directions (L x (K-1)) and the pixel mean (L,)."""
    Xd = as_matrix(X)
    mu = Xd.mean(axis=1)
    Xo = Xd - mu[:, None]
    C = (Xo @ Xo.T) / Xd.shape[1]
    w, V = np.linalg.eigh(C)
    P = V[:, ::-1][:, : K - 1].copy()
    # Fix the sign convention so the basis is reproducible.
    for j in range(P.shape[1]):
        i = int(np.argmax(np.abs(P[:, j])))
        if P[i, j] < 0:
            P[:, j] = -P[:, j]
    return P, mu


def simplex_volume(projected):
    """Volume of the simplex spanned by K points given in K-1 dimensions."""
    E = np.asarray(projected, dtype=np.float64)
    if E.ndim != 2 or E.shape[0] != E.shape[1] - 1:
        raise ShapeError(f"expected (K-1) x K projected endmembers, got {E.shape}")
    D = E[:, 1:] - E[:, [0]]
    return abs(float(np.linalg.det(D))) / math.factorial(E.shape[0])


def _cofactor_matrix(Z):
    K = Z.shape[0]
    if K == 1:
        return np.ones((1, 1))
    C = np.empty_like(Z)
    rows = np.arange(K)
    for i in range(K):
        for j in range(K):
            minor = Z[np.ix_(rows != i, rows != j)]
            C[i, j] = (-1.0) ** (i + j) * np.linalg.det(minor)
    return C


def _mvc_bordered(M, pca):
    P, mu = pca
    Mp = P.T @ (M - mu[:, None])
    K = M.shape[1]
    return np.vstack([np.ones((1, K)), Mp])


def mvc_objective(M, A, X, alpha, pca):
    """Reconstruction error plus the squared-determinant volume penalty."""
    R = X - M @ A
    K = M.shape[1]
    Z = _mvc_bordered(M, pca)
    detZ = float(np.linalg.det(Z))
    return 0.5 * float(np.sum(R * R)) + alpha / (2.0 * math.factorial(K - 1)) * detZ**2


def mvc_grad_m(M, A, X, alpha, pca):
    K = M.shape[1]
    Z = _mvc_bordered(M, pca)
    detZ = float(np.linalg.det(Z))
    cof = _cofactor_matrix(Z)
    vol_grad = (alpha / math.factorial(K - 1)) * detZ * (pca[0] @ cof[1:, :])
    return (M @ A - X) @ A.T + vol_grad


def mvc_grad_a(M, A, X):
    return M.T @ (M @ A - X)


def _armijo_descend(value0, grad, current, config, objective, state, which):
    step = config.armijo_step0
    for _ in range(config.armijo_max_shrinks + 1):
        trial = np.maximum(0.0, current - step * grad)
        value = objective(trial)
        if value <= value0 + config.armijo_c * float(np.sum(grad * (trial - current))):
            return trial, value
        step *= config.armijo_shrink
    raise LineSearchStallError(state, which, config.armijo_max_shrinks)


def mvcnmf_step(state, X, config, pca):
    """One projected-gradient update of M then A with Armijo backtracking.

    The objective cannot increase across the pair of accepted steps; a
    failed backtracking raises with the pre-step state preserved.
    """
    X = as_matrix(X)
    alpha = config.alpha
    f0 = mvc_objective(state.M, state.A, X, alpha, pca)

    gM = mvc_grad_m(state.M, state.A, X, alpha, pca)
    M_new, f_after_m = _armijo_descend(
        f0, gM, state.M, config, lambda M: mvc_objective(M, state.A, X, alpha, pca),
        state, "endmember",
    )
    _check_finite(M_new, "M", state.iteration + 1)

    gA = mvc_grad_a(M_new, state.A, X)
    A_new, f_after_a = _armijo_descend(
        f_after_m, gA, state.A, config,
        lambda A: mvc_objective(M_new, A, X, alpha, pca),
        state, "abundance",
    )
    _check_finite(A_new, "A", state.iteration + 1)

    return replace(
        state,
        M=M_new,
        A=A_new,
        iteration=state.iteration + 1,
        objective_history=state.objective_history + (f_after_a,),
    )


def _diff_adjoint(Y):
    # Transpose of the first-difference operator applied to (L-1) x K rows.
    return np.vstack([-Y[:1], Y[:-1] - Y[1:], Y[-1:]])


def edc_dissimilarity(M):
    """Sum of squared differences between the spectral gradients of all
    endmember pairs; zero when all endmembers are identical or flat."""
    M = np.asarray(M, dtype=np.float64)
    K = M.shape[1]
    G = np.diff(M, axis=0)
    return float(K * np.sum(G * G) - np.sum(G.sum(axis=1) ** 2))


def edc_dissimilarity_grad(M):
    M = np.asarray(M, dtype=np.float64)
    K = M.shape[1]
    MT = K * M - M.sum(axis=1, keepdims=True)
    return 2.0 * _diff_adjoint(np.diff(MT, axis=0))


def edcnmf_step(state, X, config):
    """One update pushing endmember spectral gradients apart.

    The abundance update is the plain ratio; the endmember numerator is
    shifted by the dissimilarity gradient, and entries driven negative are
    clamped to the configured floor.
    """
    X = as_matrix(X)
    if X.shape[0] < 2:
        raise ShapeError("need at least two bands for spectral gradients")
    num_a = state.M.T @ X
    den_a = (state.M.T @ state.M) @ state.A
    A_new = state.A * num_a / (den_a + DENOM_GUARD)
    _check_finite(A_new, "A", state.iteration + 1)

    num_m = X @ A_new.T - 0.5 * config.alpha * edc_dissimilarity_grad(state.M)
    den_m = state.M @ (A_new @ A_new.T)
    M_new = state.M * num_m / (den_m + DENOM_GUARD)
    M_new = np.where(M_new < 0.0, config.edc_floor, M_new)
    _check_finite(M_new, "M", state.iteration + 1)

    obj = variant_objective(M_new, A_new, X, "edcnmf", config)
    return replace(
        state,
        M=M_new,
        A=A_new,
        iteration=state.iteration + 1,
        objective_history=state.objective_history + (obj,),
    )


def _default_sigma(M, A, X):
    R = X - M @ A
    return float(np.sqrt(np.mean(np.sum(R * R, axis=1))))


def _safe_project_columns(A):
    sums = A.sum(axis=0)
    ok = sums > 0
    out = A.copy()
    out[:, ok] = A[:, ok] / sums[ok]
    return out, int(np.sum(~ok))


def solve(X, variant, config, init, graph=None, dg_map=None, asc=True, asc_delta=None):
    """Run a variant from the given initialization until convergence.

    Parameters
    ----------
    X : HyperCube or (L, N) array
    variant : str
        One of VARIANTS.
    config : SolverConfig
    init : (M0, A0)
        Initial factors (arrays or wrappers); returned unchanged when
        max_iters is 0.
    graph : LaplacianPair, required for the graph variants
    dg_map : (N,) array, optional
        Fixed pixel sparsity map for the adaptive-sparsity variant.
    asc : bool
        Append the constant pseudo-band that drives abundance sums toward
        one (multiplicative variants only; the volume and dissimilarity
        variants operate on the physical spectra).  The pseudo-band is
        stripped from the returned M, and the returned A is projected onto
        the simplex once at the end.

    Returns
    -------
    SolveResult
        Final factors, the objective history (initial value included, one
        entry appended per iteration), and run diagnostics.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; pick from {VARIANTS}")
    if variant in GRAPH_VARIANTS and graph is None:
        raise ValueError(f"variant {variant!r} requires a pixel graph")
    Xd = as_matrix(X)
    M0 = np.array(as_matrix(init[0]), copy=True)
    A0 = np.array(as_matrix(init[1]), copy=True)
    L, N = Xd.shape
    if M0.shape[0] != L or A0.shape != (M0.shape[1], N):
        raise ShapeError(
            f"init shapes M {M0.shape}, A {A0.shape} do not match X {Xd.shape}"
        )
    K = M0.shape[1]

    diagnostics = {
        "variant": variant,
        "iterations": 0,
        "converged": False,
        "stop_reason": "max_iters=0",
        "failed_at": None,
        "zero_columns": 0,
    }

    if config.max_iters == 0:
        h0 = None if dg_map is None else np.asarray(dg_map, dtype=float)
        cfg = config
        if variant == "cenmf" and cfg.sigma is None:
            cfg = replace(cfg, sigma=_default_sigma(M0, A0, Xd))
            diagnostics["sigma"] = cfg.sigma
        pca = pca_basis(Xd, K) if variant == "mvcnmf" else None
        obj0 = variant_objective(
            M0, A0, Xd, variant, cfg, graph=graph, h=h0, pca=pca
        )
        return SolveResult(M0, A0, [obj0], diagnostics)

    use_asc = asc and variant not in ("mvcnmf", "edcnmf")
    if use_asc:
        Xw, Mw = augment_asc(Xd, M0, asc_delta)
        diagnostics["asc_delta"] = float(Xw[-1, 0])
    else:
        Xw, Mw = Xd, M0
        diagnostics["asc_delta"] = None

    cfg = config
    if variant == "cenmf" and cfg.sigma is None:
        cfg = replace(cfg, sigma=_default_sigma(Mw, A0, Xw))
        diagnostics["sigma"] = cfg.sigma

    pca = pca_basis(Xd, K) if variant == "mvcnmf" else None
    h0 = None if dg_map is None else np.asarray(dg_map, dtype=float)
    state = SolverState(M=Mw, A=A0, h=h0)
    obj0 = variant_objective(
        state.M, state.A, Xw, variant, cfg, graph=graph, h=state.h, pca=pca
    )
    state = replace(state, objective_history=(obj0,))
    recon_history = [0.5 * float(np.sum((Xw - state.M @ state.A) ** 2))]

    stop_reason = "max_iters"
    try:
        for it in range(cfg.max_iters):
            if variant in MULTIPLICATIVE_VARIANTS:
                state = multiplicative_step(state, Xw, variant, cfg, graph=graph)
            elif variant == "cenmf":
                state = cenmf_step(state, Xw, cfg)
            elif variant == "rrlbs":
                refresh = (it + 1) % cfg.refresh_period == 0
                state = rrlbs_step(state, Xw, cfg, refresh_h=refresh)
            elif variant == "mvcnmf":
                state = mvcnmf_step(state, Xw, cfg, pca)
            else:
                state = edcnmf_step(state, Xw, cfg)
            recon_history.append(
                0.5 * float(np.sum((Xw - state.M @ state.A) ** 2))
            )
            hist = state.objective_history
            if cfg.rel_tol > 0 and len(hist) >= 2:
                prev, cur = hist[-2], hist[-1]
                denom = max(abs(prev), np.finfo(float).tiny)
                if abs(cur - prev) / denom < cfg.rel_tol:
                    stop_reason = "rel_tol"
                    break
    except DivergenceError as err:
        diagnostics["failed_at"] = err.iteration
        raise

    M_out = state.M[:L] if use_asc else state.M
    A_out, zero_cols = _safe_project_columns(state.A)
    diagnostics.update(
        iterations=state.iteration,
        converged=stop_reason == "rel_tol",
        stop_reason=stop_reason,
        zero_columns=zero_cols,
        recon_history=recon_history,
    )
    return SolveResult(M_out, A_out, list(state.objective_history), diagnostics)
