"""VCA endmember extraction and FCLS abundance estimation."""

import numpy as np
import pytest

from hsunmix import (
    DegenerateSubspaceError,
    ShapeError,
    fcls,
    init_pair,
    loss,
    reconstruct,
    vca,
)

from conftest import random_simplex_columns, simplex_lsq_oracle


def make_pure_pixel_scene(rng, L=20, K=4, N=20):
    """K noise-free pure pixels; all other pixels strict convex mixtures."""
    M = rng.random((L, K)) + 0.2
    pure_idx = rng.choice(N, size=K, replace=False)
    A = np.zeros((K, N))
    for k, idx in enumerate(pure_idx):
        A[:, idx] = 0.0
        A[k, idx] = 1.0
    mixed = [n for n in range(N) if n not in set(pure_idx)]
    # Strictly interior mixtures.
    raw = rng.gamma(1.0, 1.0, size=(K, len(mixed))) + 0.3
    A[:, mixed] = raw / raw.sum(axis=0)
    return M @ A, M, A, sorted(int(i) for i in pure_idx)


def hull_vertices_oracle(X, tol=1e-8):
    """Brute force: pixel i is a vertex iff it cannot be represented as a
    convex combination of the other pixels."""
    N = X.shape[1]
    vertices = []
    for i in range(N):
        others = np.delete(X, i, axis=1)
        a = simplex_lsq_oracle(others, X[:, i])
        if np.linalg.norm(X[:, i] - others @ a) > tol:
            vertices.append(i)
    return vertices


class TestVca:
    def test_recovers_pure_pixels_exactly(self, rng):
        X, M, A, pure = make_pure_pixel_scene(rng)
        oracle = hull_vertices_oracle(X)
        assert oracle == pure  # the oracle itself agrees with construction
        _, indices = vca(X, K=4, seed=7)
        assert sorted(indices.tolist()) == pure

    def test_segment_extremes_for_two_endmembers(self, rng):
        L, N = 12, 30
        m1 = rng.random(L) + 0.2
        m2 = rng.random(L) + 0.2
        t = np.concatenate([[0.0, 1.0], rng.uniform(0.05, 0.95, N - 2)])
        X = np.outer(m1, 1 - t) + np.outer(m2, t)
        # Brute-force farthest pair oracle.
        best = max(
            ((i, j) for i in range(N) for j in range(i + 1, N)),
            key=lambda p: np.linalg.norm(X[:, p[0]] - X[:, p[1]]),
        )
        _, indices = vca(X, K=2, seed=3)
        assert set(indices.tolist()) == set(best)

    def test_duplicates_still_span_distinct_signatures(self, rng):
        X, M, A, pure = make_pure_pixel_scene(rng, N=18)
        X = np.hstack([X, X[:, pure[:2]]])  # duplicate two pure pixels
        _, indices = vca(X, K=4, seed=1)
        selected = X[:, indices]
        assert np.linalg.matrix_rank(selected) == 4
        # All four distinct pure signatures present (up to duplication).
        matched = set()
        for col in selected.T:
            for p in pure:
                if np.allclose(col, X[:, p]):
                    matched.add(p)
        assert len(matched) == 4

    def test_selected_columns_are_data_columns(self, rng):
        X = rng.random((15, 40)) + 0.1
        M, indices = vca(X, K=3, seed=0)
        for k, idx in enumerate(indices):
            np.testing.assert_array_equal(M.data[:, k], X[:, idx])

    def test_deterministic_per_seed(self, rng):
        X = rng.random((15, 40)) + 0.1
        M1, i1 = vca(X, K=3, seed=9)
        M2, i2 = vca(X, K=3, seed=9)
        np.testing.assert_array_equal(i1, i2)
        np.testing.assert_array_equal(M1.data, M2.data)

    def test_k_out_of_range(self, rng):
        X = rng.random((5, 10))
        with pytest.raises(ShapeError):
            vca(X, K=1)
        with pytest.raises(ShapeError):
            vca(X, K=6)

    def test_degenerate_subspace(self, rng):
        m = rng.random(10) + 0.1
        X = np.outer(m, rng.uniform(0.5, 1.5, 20))  # rank 1
        with pytest.raises(DegenerateSubspaceError):
            vca(X, K=3)


class TestFcls:
    def test_pure_pixel_one_hot(self, rng):
        M = rng.random((10, 3)) + 0.1
        A = fcls(M[:, [1]], M)
        np.testing.assert_allclose(A.data[:, 0], [0.0, 1.0, 0.0], atol=1e-9)

    def test_even_mixture(self, rng):
        M = rng.random((10, 2)) + 0.1
        x = 0.5 * M[:, 0] + 0.5 * M[:, 1]
        A = fcls(x[:, None], M)
        np.testing.assert_allclose(A.data[:, 0], [0.5, 0.5], atol=1e-8)

    def test_exact_recovery_against_oracle(self, rng):
        M = rng.random((10, 3)) + 0.1
        A_true = random_simplex_columns(rng, 3, 12)
        X = M @ A_true
        A = fcls(X, M)
        np.testing.assert_allclose(A.data, A_true, atol=1e-6)
        for n in range(12):
            a_oracle = simplex_lsq_oracle(M, X[:, n])
            np.testing.assert_allclose(A.data[:, n], a_oracle, atol=1e-6)

    def test_noisy_pixels_against_oracle(self, rng):
        M = rng.random((12, 4)) + 0.1
        A_true = random_simplex_columns(rng, 4, 15)
        X = M @ A_true + 0.02 * rng.standard_normal((12, 15))
        X = np.maximum(X, 0)
        A = fcls(X, M)
        sums = A.data.sum(axis=0)
        np.testing.assert_allclose(sums, 1.0, atol=1e-10)
        for n in range(15):
            a_oracle = simplex_lsq_oracle(M, X[:, n])
            np.testing.assert_allclose(A.data[:, n], a_oracle, atol=1e-6)

    def test_beats_random_simplex_points(self, rng):
        M = rng.random((8, 3)) + 0.1
        x = rng.random(8)
        a_hat = fcls(x[:, None], M).data[:, 0]
        val = np.sum((x - M @ a_hat) ** 2)
        candidates = random_simplex_columns(rng, 3, 1000)
        vals = np.sum((x[:, None] - M @ candidates) ** 2, axis=0)
        assert val <= vals.min() + 1e-10

    def test_permutation_equivariance(self, rng):
        M = rng.random((10, 4)) + 0.1
        X = rng.random((10, 6))
        perm = [2, 0, 3, 1]
        A = fcls(X, M)
        A_perm = fcls(X, M[:, perm])
        np.testing.assert_allclose(A_perm.data, A.data[perm, :], atol=1e-9)

    def test_underdetermined_warns_but_solves(self, rng):
        M = rng.random((2, 4)) + 0.1
        with pytest.warns(RuntimeWarning):
            A = fcls(rng.random((2, 3)), M)
        np.testing.assert_allclose(A.data.sum(axis=0), 1.0, atol=1e-8)

    def test_rank_deficient_warns(self, rng):
        M = rng.random((8, 2)) + 0.1
        M = np.hstack([M, M[:, [0]]])  # duplicated column
        with pytest.warns(RuntimeWarning):
            fcls(rng.random((8, 2)), M)


class TestInitPair:
    def test_beats_random_initialization(self, rng):
        from hsunmix import SceneConfig, generate_scene

        scene = generate_scene(SceneConfig(z=3, k=3, bands=40, seed=5))
        X = scene.X.data
        M, A = init_pair(X, K=3, seed=0)
        init_loss = loss(X, reconstruct(M, A), "frobenius")
        random_losses = []
        for s in range(10):
            r = np.random.default_rng(s)
            M_r = r.random(M.data.shape) * X.max()
            A_r = random_simplex_columns(r, 3, X.shape[1])
            random_losses.append(loss(X, reconstruct(M_r, A_r), "frobenius"))
        assert init_loss <= np.mean(random_losses)

    def test_columns_on_simplex(self, rng):
        from hsunmix import SceneConfig, generate_scene

        scene = generate_scene(SceneConfig(z=3, k=3, bands=40, seed=2))
        _, A = init_pair(scene.X.data, K=3, seed=0)
        np.testing.assert_allclose(A.data.sum(axis=0), 1.0, atol=1e-6)

    def test_bit_identical_for_same_seed(self, rng):
        X = rng.random((12, 30)) + 0.05
        M1, A1 = init_pair(X, K=3, seed=4)
        M2, A2 = init_pair(X, K=3, seed=4)
        assert np.array_equal(M1.data, M2.data)
        assert np.array_equal(A1.data, A2.data)
