"""Seeded synthetic benchmark scenes with known endmembers and abundances.

A scene starts from a procedural spectral library (smooth strictly
positive signatures), tiles a square image with randomly assigned ground
covers, low-pass filters the cover indicators into mixed abundances,
replaces the remaining near-pure pixels with two-endmember 50/50 mixtures,
and finally injects noise at a requested SNR.  Everything is deterministic
given the seed, so scenes can be regenerated from their config alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import GenerationError, ShapeError
from .evaluation import sad
from .model import AbundanceMatrix, EndmemberMatrix, HyperCube

LIBRARY_SIZE = 15
PURE_PIXEL_LIMIT = 0.8


@dataclass(frozen=True)
class SceneConfig:
    """Generation axes: grid size z (image is z^2 x z^2 pixels), endmember
    count, band count, target SNR in dB (inf = noise-free) and smoothing
    passes of the (z+1) x (z+1) box filter."""

    z: int = 8
    k: int = 5
    bands: int = 480
    snr_db: float = math.inf
    seed: int = 0
    filter_passes: int = 1
    clamp: bool = False
    noise_kind: str = "gaussian"

    def __post_init__(self):
        if self.z < 2:
            raise ValueError("z must be >= 2")
        if not 2 <= self.k <= LIBRARY_SIZE:
            raise ValueError(f"endmember count must lie in [2, {LIBRARY_SIZE}]")
        if self.k > self.z**2:
            raise ValueError("more endmembers than regions to place them in")
        if self.bands < 16:
            raise ValueError("need at least 16 bands")
        if not (self.snr_db > 0 or math.isinf(self.snr_db)):
            raise ValueError("snr_db must be positive or infinite")
        if self.filter_passes < 1:
            raise ValueError("filter_passes must be >= 1")
        if self.noise_kind not in ("gaussian", "uniform"):
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")

    @property
    def side(self):
        return self.z**2


@dataclass(frozen=True)
class SyntheticScene:
    """Generated cube plus its exact factors and noise bookkeeping."""

    X: HyperCube
    M_true: EndmemberMatrix
    A_true: AbundanceMatrix
    noise_power: float
    achieved_snr_db: float
    config: SceneConfig


def _draw_spectrum(rng, L):
    x = np.arange(L, dtype=float)
    baseline = rng.uniform(0.02, 0.15)
    n_bumps = int(rng.integers(4, 9))
    s = np.full(L, baseline)
    for _ in range(n_bumps):
        center = rng.uniform(0.0, L)
        width = rng.uniform(L / 40.0, L / 8.0)
        amp = rng.uniform(0.1, 1.0)
        s += amp * np.exp(-((x - center) ** 2) / (2.0 * width**2))
    peak = rng.uniform(0.4, 1.0)
    return s / s.max() * peak


def generate_library(count=LIBRARY_SIZE, bands=480, seed=0, min_separation=0.1):
    """Deterministic library of smooth, strictly positive signatures.

    All entries lie in (0, 1] and every pair of signatures is at least
    min_separation radians of spectral angle apart.  A user-supplied
    library file can replace this stand-in for fidelity runs (see io).
    """
    if count > LIBRARY_SIZE:
        raise ValueError(f"library holds at most {LIBRARY_SIZE} signatures")
    if bands < 16:
        raise ShapeError("need at least 16 bands")
    rng = np.random.default_rng(seed)
    accepted = []
    for _ in range(count):
        for _attempt in range(100):
            cand = _draw_spectrum(rng, bands)
            if all(sad(cand, prev) >= min_separation for prev in accepted):
                accepted.append(cand)
                break
        else:
            raise GenerationError(
                f"could not reach {min_separation} rad separation after 100 resamples"
            )
    M = np.column_stack(accepted)
    names = tuple(f"Material{i + 1}" for i in range(count))
    return EndmemberMatrix(M, names=names)


def generate_abundances(z, K, seed=0, filter_passes=1):
    """Abundance maps for a z^2 x z^2 image split into z x z cover regions.

    Each region is filled with a single cover (all K covers appear at
    least once), the one-hot indicator stack is smoothed by a
    (z+1) x (z+1) box filter with symmetric boundary padding, and every
    pixel whose largest abundance still exceeds 0.8 is replaced by an
    equal mixture of its two most abundant covers.
    """
    if z < 2:
        raise ValueError("z must be >= 2")
    if not 2 <= K <= z**2:
        raise ValueError(f"K={K} must lie in [2, z^2={z**2}]")
    rng = np.random.default_rng(seed)

    while True:
        regions = rng.integers(0, K, size=(z, z))
        if np.unique(regions).size == K:
            break

    side = z**2
    covers = np.repeat(np.repeat(regions, z, axis=0), z, axis=1)
    stack = np.zeros((K, side, side))
    for k in range(K):
        stack[k] = covers == k

    for _ in range(filter_passes):
        for k in range(K):
            stack[k] = uniform_filter(stack[k], size=z + 1, mode="reflect")

    A = stack.reshape(K, side * side)
    peaked = np.flatnonzero(A.max(axis=0) > PURE_PIXEL_LIMIT)
    for n in peaked:
        top2 = np.argsort(-A[:, n], kind="stable")[:2]
        A[:, n] = 0.0
        A[top2, n] = 0.5
    return AbundanceMatrix(A)


def add_noise(Y, snr_db, seed=0, kind="gaussian", clamp=False):
    """Inject zero-mean noise scaled to hit the target SNR exactly.

    SNR is 10 log10 of total signal power over total noise power, both
    measured on the given noise-free matrix.  An infinite target returns
    the input bit-identically.

    Returns
    -------
    (ndarray, float)
        Noisy matrix and the achieved SNR in dB.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if math.isinf(snr_db):
        return Y.copy(), math.inf
    if not snr_db > 0:
        raise ValueError("snr_db must be positive or infinite")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        noise = rng.standard_normal(Y.shape)
    elif kind == "uniform":
        noise = rng.uniform(-1.0, 1.0, size=Y.shape)
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    signal_power = float(np.sum(Y * Y))
    raw_power = float(np.sum(noise * noise))
    scale = np.sqrt(signal_power / (10.0 ** (snr_db / 10.0) * raw_power))
    noise *= scale
    X = Y + noise
    if clamp:
        np.maximum(X, 0.0, out=X)
    achieved = 10.0 * np.log10(signal_power / float(np.sum(noise * noise)))
    return X, float(achieved)


def generate_scene(config):
    """Generate the full scene for a SceneConfig.

    The first K library signatures are the true endmembers; the noise-free
    image is their product with the generated abundances.
    """
    library = generate_library(LIBRARY_SIZE, config.bands, config.seed)
    M_true = EndmemberMatrix(
        library.data[:, : config.k], names=library.names[: config.k]
    )
    A_true = generate_abundances(
        config.z, config.k, seed=config.seed, filter_passes=config.filter_passes
    )
    Y = M_true.data @ A_true.data
    X, achieved = add_noise(
        Y, config.snr_db, seed=config.seed, kind=config.noise_kind,
        clamp=config.clamp,
    )
    noise_power = float(np.sum((X - Y) ** 2)) / Y.shape[1]
    cube = HyperCube(
        X,
        rows=config.side,
        cols=config.side,
        allow_negative=not config.clamp,
    )
    return SyntheticScene(
        X=cube,
        M_true=M_true,
        A_true=A_true,
        noise_power=noise_power,
        achieved_snr_db=achieved,
        config=config,
    )
