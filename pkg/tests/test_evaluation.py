"""Metrics, endmember matching, and report assembly."""

import itertools

import numpy as np
import pytest

from hsunmix import ShapeError, evaluate, match_endmembers, rmse, sad

from conftest import random_simplex_columns


class TestSad:
    def test_self_angle_zero(self, rng):
        m = rng.random(10) + 0.1
        assert sad(m, m) == pytest.approx(0.0, abs=1e-12)

    def test_scale_invariance(self, rng):
        m = rng.random(10) + 0.1
        assert sad(m, 3.7 * m) == pytest.approx(0.0, abs=1e-7)

    def test_orthogonal_right_angle(self):
        a = np.array([1.0, 0.0])
        b = np.array([0.0, 1.0])
        assert sad(a, b) == pytest.approx(np.pi / 2, abs=1e-12)

    def test_symmetry(self, rng):
        a, b = rng.random(8), rng.random(8)
        assert sad(a, b) == sad(b, a)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            sad(np.zeros(4), np.ones(4))


class TestRmse:
    def test_identical_rows(self, rng):
        a = rng.random(20)
        assert rmse(a, a) == 0.0

    def test_analytic_cases(self):
        assert rmse([1.0, 1.0], [0.0, 0.0]) == pytest.approx(1.0)
        assert rmse([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            rmse([1.0], [1.0, 2.0])


class TestMatchEndmembers:
    def _brute_force(self, M_ref, M_est):
        K = M_ref.shape[1]
        best, best_total = None, np.inf
        for perm in itertools.permutations(range(K)):
            total = sum(sad(M_ref[:, i], M_est[:, perm[i]]) for i in range(K))
            if total < best_total:
                best, best_total = perm, total
        return np.asarray(best)

    def test_identity(self, rng):
        M = rng.random((6, 3)) + 0.05
        np.testing.assert_array_equal(match_endmembers(M, M), [0, 1, 2])

    def test_swap_recovers_inverse(self, rng):
        M = rng.random((6, 3)) + 0.05
        swap = [2, 0, 1]
        perm = match_endmembers(M, M[:, swap])
        # est column perm[i] must be ref column i
        for i in range(3):
            np.testing.assert_array_equal(M[:, swap][:, perm[i]], M[:, i])

    def test_agrees_with_factorial_enumeration(self, rng):
        for _ in range(25):
            M_ref = rng.random((5, 3)) + 0.05
            M_est = rng.random((5, 3)) + 0.05
            np.testing.assert_array_equal(
                match_endmembers(M_ref, M_est), self._brute_force(M_ref, M_est)
            )

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeError):
            match_endmembers(rng.random((4, 2)), rng.random((4, 3)))


class TestEvaluate:
    def _make_pair(self, rng, K=3, N=40, L=12):
        M = rng.random((L, K)) + 0.05
        A = random_simplex_columns(rng, K, N)
        return M, A

    def test_perfect_estimate_scores_zero(self, rng):
        M, A = self._make_pair(rng)
        report = evaluate((M, A), (M, A))
        assert report.mean_sad == pytest.approx(0.0, abs=1e-9)
        assert report.mean_rmse == pytest.approx(0.0, abs=1e-9)

    def test_permutation_invariance(self, rng):
        M, A = self._make_pair(rng)
        perm = [1, 2, 0]
        report = evaluate((M, A), (M[:, perm], A[perm, :]))
        assert report.mean_sad == pytest.approx(0.0, abs=1e-9)
        assert report.mean_rmse == pytest.approx(0.0, abs=1e-9)

    def test_means_are_arithmetic_means(self, rng):
        M, A = self._make_pair(rng)
        M2, A2 = self._make_pair(rng)
        report = evaluate((M, A), (M2, A2))
        assert report.mean_sad == pytest.approx(np.mean(report.sad_values))
        assert report.mean_rmse == pytest.approx(np.mean(report.rmse_values))
        assert min(report.sad_values) <= report.mean_sad <= max(report.sad_values)
        assert min(report.rmse_values) <= report.mean_rmse <= max(report.rmse_values)

    def test_simultaneous_permutation_of_estimate_is_invariant(self, rng):
        M, A = self._make_pair(rng)
        M_est, A_est = self._make_pair(rng)
        base = evaluate((M, A), (M_est, A_est))
        perm = [2, 0, 1]
        permed = evaluate((M, A), (M_est[:, perm], A_est[perm, :]))
        assert base.mean_sad == pytest.approx(permed.mean_sad, abs=1e-12)
        assert base.mean_rmse == pytest.approx(permed.mean_rmse, abs=1e-12)

    def test_names_flow_from_ground_truth(self, rng):
        from hsunmix import AbundanceMatrix, EndmemberMatrix, GroundTruth

        M, A = self._make_pair(rng)
        gt = GroundTruth(
            EndmemberMatrix(M, names=("soil", "tree", "water")),
            AbundanceMatrix(A),
        )
        report = evaluate(gt, (M, A))
        assert report.names == ("soil", "tree", "water")
