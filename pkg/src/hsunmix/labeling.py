"""Ground-truth production for unmixing studies.

Endmember signatures come from hand-picked pixels (or external library
spectra), abundances from a supervised solve against those signatures,
and a quantitative verification step checks that spectrally similar
pixels received similar abundances.  A separate path turns per-pixel
classification labels into unmixing ground truth by anchoring the
abundance solve around the one-hot label matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace as dc_replace

import numpy as np
from scipy.stats import spearmanr

from .errors import ShapeError
from .evaluation import rmse, sad
from .initializers import fcls
from .model import (
    DENOM_GUARD,
    AbundanceMatrix,
    EndmemberMatrix,
    as_matrix,
    augment_asc,
)
from .solvers import (
    GRAPH_VARIANTS,
    MULTIPLICATIVE_VARIANTS,
    SolverConfig,
    abundance_terms,
    variant_objective,
)


@dataclass(frozen=True)
class SeedSource:
    """Where one endmember signature comes from: pixel indices into the
    cube, or an external signature used verbatim."""

    pixels: tuple = None
    signature: np.ndarray = None

    def __post_init__(self):
        has_pixels = self.pixels is not None and len(self.pixels) > 0
        has_signature = self.signature is not None
        if has_pixels == has_signature:
            raise ValueError("give either seed pixels or a signature, not both")
        if has_pixels:
            object.__setattr__(self, "pixels", tuple(int(p) for p in self.pixels))
        else:
            sig = np.asarray(self.signature, dtype=np.float64).ravel()
            if (sig < 0).any():
                raise ValueError("external signatures must be nonnegative")
            object.__setattr__(self, "signature", sig)


@dataclass(frozen=True)
class EndmemberSeeds:
    sources: tuple
    names: tuple = None

    def __post_init__(self):
        if not self.sources:
            raise ValueError("need at least one endmember seed")
        object.__setattr__(self, "sources", tuple(self.sources))
        names = self.names
        names = (
            tuple(f"EM{k + 1}" for k in range(len(self.sources)))
            if names is None
            else tuple(str(n) for n in names)
        )
        if len(names) != len(self.sources):
            raise ShapeError("one name per endmember seed required")
        object.__setattr__(self, "names", names)


@dataclass(frozen=True)
class ClassLabelMap:
    """K x N one-hot matrix: column n carries a single 1 in the row of
    pixel n's class."""

    Y: np.ndarray

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=np.float64)
        if Y.ndim != 2:
            raise ShapeError("label map must be a K x N matrix")
        if not np.isin(Y, (0.0, 1.0)).all():
            raise ValueError("label map entries must be 0 or 1")
        if not (Y.sum(axis=0) == 1.0).all():
            raise ValueError("every pixel needs exactly one class label")
        Y.setflags(write=False)
        object.__setattr__(self, "Y", Y)

    @property
    def n_classes(self):
        return self.Y.shape[0]


@dataclass(frozen=True)
class GroundTruth:
    M: EndmemberMatrix
    A: AbundanceMatrix
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.M.data.shape[1] != self.A.data.shape[0]:
            raise ShapeError(
                f"endmember count mismatch: M has {self.M.data.shape[1]}, "
                f"A has {self.A.data.shape[0]}"
            )
        sums = self.A.data.sum(axis=0)
        worst = float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0
        if worst > 1e-6:
            warnings.warn(
                f"abundance columns deviate from the simplex by up to {worst:.3g}",
                RuntimeWarning,
            )


@dataclass(frozen=True)
class LabelingCriteria:
    """Quantitative acceptance thresholds for a labeled ground truth."""

    min_correlation: float = 0.5
    max_recon_rmse: float = float("inf")
    probe_count: int = 200
    max_rounds: int = 5


@dataclass(frozen=True)
class VerificationReport:
    correlation: float
    recon_rmse: float
    passed: bool
    probe_count: int
    seed: int


@dataclass(frozen=True)
class LabelingRunReport:
    verified: bool
    rounds: tuple


def label_endmembers(X, seeds):
    """Average each endmember's seed pixels (or take its signature as-is)."""
    Xd = as_matrix(X)
    L, N = Xd.shape
    columns = []
    for k, src in enumerate(seeds.sources):
        if src.signature is not None:
            if src.signature.size != L:
                raise ShapeError(
                    f"signature for {seeds.names[k]!r} has {src.signature.size} "
                    f"bands, cube has {L}"
                )
            columns.append(src.signature)
        else:
            idx = np.asarray(src.pixels, dtype=int)
            if (idx < 0).any() or (idx >= N).any():
                raise IndexError(f"seed pixel out of range for {seeds.names[k]!r}")
            columns.append(Xd[:, idx].mean(axis=1))
    return EndmemberMatrix(np.column_stack(columns), names=seeds.names)


def solve_abundances(
    X,
    M,
    variant="nmf",
    config=None,
    graph=None,
    dg_map=None,
    anchor_y=None,
    anchor_weight=0.0,
    asc=True,
):
    """Multiplicative abundance-only solve with the endmembers frozen.

    Optionally anchors the solution toward a fixed label matrix with
    weight anchor_weight.  The recorded history holds the anchored
    objective, which is non-increasing under the ratio updates; the
    returned columns are projected onto the simplex once at the end.
    """
    if variant not in MULTIPLICATIVE_VARIANTS:
        raise ValueError(
            f"abundance-only solving supports {MULTIPLICATIVE_VARIANTS}, "
            f"got {variant!r}"
        )
    if variant in GRAPH_VARIANTS and graph is None:
        raise ValueError(f"variant {variant!r} requires a pixel graph")
    config = config or SolverConfig()
    Xd, Md = as_matrix(X), as_matrix(M)
    K, N = Md.shape[1], Xd.shape[1]
    if anchor_y is not None:
        anchor_y = as_matrix(anchor_y)
        if anchor_y.shape != (K, N):
            raise ShapeError(f"anchor labels must be {K} x {N}")

    if asc:
        Xw, Mw = augment_asc(Xd, Md)
    else:
        Xw, Mw = Xd, Md
    A = np.full((K, N), 1.0 / K)
    h = None if dg_map is None else np.asarray(dg_map, dtype=float)

    def objective(A):
        value = variant_objective(Mw, A, Xw, variant, config, graph=graph, h=h)
        if anchor_y is not None and anchor_weight > 0:
            value += anchor_weight * float(np.sum((A - anchor_y) ** 2))
        return value

    history = [objective(A)]
    for _ in range(config.max_iters):
        num, den = abundance_terms(
            A, Xw, Mw, variant, config, graph=graph, h=h,
            anchor_y=anchor_y, anchor_weight=anchor_weight,
        )
        A = A * num / (den + DENOM_GUARD)
        history.append(objective(A))
        if config.rel_tol > 0:
            prev, cur = history[-2], history[-1]
            if abs(cur - prev) / max(abs(prev), np.finfo(float).tiny) < config.rel_tol:
                break

    sums = A.sum(axis=0)
    ok = sums > 0
    A[:, ok] = A[:, ok] / sums[ok]
    return AbundanceMatrix(A), history


def label_abundances(X, M, method="fcls", variant="nmf", config=None, graph=None):
    """Supervised abundance labeling against fixed endmembers.

    method "fcls" solves the per-pixel constrained least-squares problem;
    method "solver" runs the named variant's abundance update only.
    """
    if method == "fcls":
        return fcls(X, M)
    if method == "solver":
        A, _ = solve_abundances(X, M, variant=variant, config=config, graph=graph)
        return A
    raise ValueError(f"unknown abundance labeling method {method!r}")


def verify_labeling(X, gt, probe_count=200, seed=0, threshold=0.5):
    """Check that spectrally similar pixels carry similar abundances.

    Samples probe pixel pairs and rank-correlates spectral similarity
    (negative spectral angle) with abundance similarity (negative RMSE);
    passes at correlation >= threshold.  Deterministic per seed and
    symmetric in pair order.
    """
    if probe_count < 2:
        raise ValueError("probe_count must be >= 2")
    Xd = as_matrix(X)
    Md, Ad = as_matrix(gt.M), as_matrix(gt.A)
    N = Xd.shape[1]
    rng = np.random.default_rng(seed)
    norms = np.linalg.norm(Xd, axis=0)

    spec_sim, ab_sim = [], []
    for _ in range(probe_count):
        i, j = rng.choice(N, size=2, replace=False)
        if norms[i] == 0.0 or norms[j] == 0.0:
            continue
        spec_sim.append(-sad(Xd[:, i], Xd[:, j]))
        ab_sim.append(-rmse(Ad[:, i], Ad[:, j]))

    if len(spec_sim) < 2 or np.ptp(spec_sim) == 0 or np.ptp(ab_sim) == 0:
        corr = 0.0
    else:
        corr = float(spearmanr(spec_sim, ab_sim).statistic)
        if np.isnan(corr):
            corr = 0.0
    recon = float(np.sqrt(np.mean((Xd - Md @ Ad) ** 2)))
    return VerificationReport(
        correlation=corr,
        recon_rmse=recon,
        passed=corr >= threshold,
        probe_count=probe_count,
        seed=seed,
    )


def _refine_seeds(seeds, A, top_fraction=0.02):
    """Grow each pixel-seeded endmember with its current purest pixels."""
    Ad = as_matrix(A)
    new_sources = []
    for k, src in enumerate(seeds.sources):
        if src.signature is not None:
            new_sources.append(src)
            continue
        row = Ad[k]
        count = max(1, int(round(top_fraction * row.size)))
        top = np.argsort(-row, kind="stable")[:count]
        merged = tuple(sorted(set(src.pixels) | set(int(t) for t in top)))
        new_sources.append(SeedSource(pixels=merged))
    return dc_replace(seeds, sources=tuple(new_sources))


def label_ground_truth(
    X,
    seeds,
    method="fcls",
    criteria=LabelingCriteria(),
    variant="nmf",
    config=None,
    graph=None,
    seed=0,
):
    """Alternate endmember labeling, abundance labeling and verification.

    Each failed round widens the pixel seeds with the currently purest
    pixels per endmember and retries, up to the round budget.  Returns the
    best ground truth found and a per-round report; verified=False flags
    an exhausted budget.
    """
    current = seeds
    rounds = []
    best = None
    best_corr = -np.inf
    for round_idx in range(criteria.max_rounds):
        M = label_endmembers(X, current)
        A = label_abundances(
            X, M, method=method, variant=variant, config=config, graph=graph
        )
        gt = GroundTruth(
            M, A, provenance={"round": round_idx + 1, "method": method}
        )
        report = verify_labeling(
            X, gt, probe_count=criteria.probe_count, seed=seed,
            threshold=criteria.min_correlation,
        )
        passed = report.passed and report.recon_rmse <= criteria.max_recon_rmse
        rounds.append(report)
        if report.correlation > best_corr:
            best, best_corr = gt, report.correlation
        if passed:
            return gt, LabelingRunReport(verified=True, rounds=tuple(rounds))
        current = _refine_seeds(current, A)
    return best, LabelingRunReport(verified=False, rounds=tuple(rounds))


def _class_means(Xd, labels, statistic="mean", purity_percentile=100.0):
    Y = labels.Y
    K = Y.shape[0]
    columns = []
    for k in range(K):
        members = np.flatnonzero(Y[k] == 1.0)
        if members.size == 0:
            raise ValueError(f"class {k} has no member pixels")
        spectra = Xd[:, members]
        if purity_percentile < 100.0 and members.size > 1:
            center = spectra.mean(axis=1, keepdims=True)
            dist = np.linalg.norm(spectra - center, axis=0)
            cutoff = np.percentile(dist, purity_percentile)
            keep = dist <= cutoff
            spectra = spectra[:, keep]
        if statistic == "median":
            columns.append(np.median(spectra, axis=1))
        else:
            columns.append(spectra.mean(axis=1))
    return np.column_stack(columns)


def hyc_transform(
    X,
    labels,
    mode="fixed_endmembers",
    base_variant="nmf",
    lam=0.1,
    alpha=1.0,
    seed=0,
    config=None,
    graph=None,
    statistic="mean",
    purity_percentile=100.0,
):
    """Turn per-pixel classification labels into unmixing ground truth.

    Candidate endmembers are the per-class mean (or median) spectra.  The
    abundance solve is anchored toward the one-hot label matrix with
    weight alpha; mode "refine_endmembers" additionally keeps updating the
    endmembers by the plain multiplicative rule instead of freezing them.
    """
    if mode not in ("fixed_endmembers", "refine_endmembers"):
        raise ValueError(f"unknown mode {mode!r}")
    if not isinstance(labels, ClassLabelMap):
        labels = ClassLabelMap(labels)
    Xd = as_matrix(X)
    if labels.Y.shape[1] != Xd.shape[1]:
        raise ShapeError("label map and cube disagree on the pixel count")
    config = config or SolverConfig(lam=lam, alpha=alpha, seed=seed)

    M0 = _class_means(Xd, labels, statistic, purity_percentile)
    names = tuple(f"Class{k + 1}" for k in range(labels.n_classes))

    if mode == "fixed_endmembers":
        A, _ = solve_abundances(
            X, M0, variant=base_variant, config=config, graph=graph,
            anchor_y=labels.Y, anchor_weight=alpha,
        )
        M_out = M0
    else:
        from .solvers import _plain_m_update  # shared update rule

        Xw, Mw = augment_asc(Xd, M0)
        K, N = M0.shape[1], Xd.shape[1]
        A = np.full((K, N), 1.0 / K)
        prev = None
        for _ in range(config.max_iters):
            Mw = _plain_m_update(Mw, A, Xw)
            num, den = abundance_terms(
                A, Xw, Mw, base_variant, config, graph=graph,
                anchor_y=labels.Y, anchor_weight=alpha,
            )
            A = A * num / (den + DENOM_GUARD)
            value = variant_objective(Mw, A, Xw, base_variant, config, graph=graph)
            if alpha > 0:
                value += alpha * float(np.sum((A - labels.Y) ** 2))
            if (
                prev is not None
                and config.rel_tol > 0
                and abs(value - prev) / max(abs(prev), np.finfo(float).tiny)
                < config.rel_tol
            ):
                break
            prev = value
        M_out = Mw[: Xd.shape[0]]
        sums = A.sum(axis=0)
        ok = sums > 0
        A = A.copy()
        A[:, ok] = A[:, ok] / sums[ok]
        A = AbundanceMatrix(A)

    return GroundTruth(
        EndmemberMatrix(M_out, names=names),
        A if isinstance(A, AbundanceMatrix) else AbundanceMatrix(A),
        provenance={
            "source": "classification-labels",
            "mode": mode,
            "base_variant": base_variant,
            "lam": lam,
            "alpha": alpha,
        },
    )
