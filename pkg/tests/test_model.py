"""Mixing model containers, losses, and sum-to-one machinery."""

import numpy as np
import pytest

from hsunmix import (
    AbundanceMatrix,
    DegenerateColumnError,
    EndmemberMatrix,
    HyperCube,
    LossKind,
    ShapeError,
    augment_asc,
    loss,
    project_sum_to_one,
    reconstruct,
)

from conftest import simplex_lsq_oracle


class TestContainers:
    def test_cube_grid_must_match_pixels(self):
        with pytest.raises(ShapeError):
            HyperCube(np.ones((3, 6)), rows=2, cols=2)

    def test_cube_rejects_negative_by_default(self):
        data = np.ones((3, 4))
        data[1, 2] = -0.5
        with pytest.raises(ValueError):
            HyperCube(data, rows=2, cols=2)
        cube = HyperCube(data, rows=2, cols=2, allow_negative=True)
        assert cube.data[1, 2] == -0.5

    def test_cube_default_band_ids(self):
        cube = HyperCube(np.ones((3, 4)), rows=2, cols=2)
        assert cube.band_ids == (1, 2, 3)

    def test_cube_data_is_immutable(self):
        cube = HyperCube(np.ones((3, 4)), rows=2, cols=2)
        with pytest.raises(ValueError):
            cube.data[0, 0] = 2.0

    def test_endmembers_reject_more_columns_than_bands(self):
        with pytest.raises(ShapeError):
            EndmemberMatrix(np.ones((2, 3)))

    def test_endmember_names_default(self):
        M = EndmemberMatrix(np.ones((4, 2)))
        assert M.names == ("EM1", "EM2")

    def test_abundance_rejects_negative(self):
        with pytest.raises(ValueError):
            AbundanceMatrix([[0.5, -0.1], [0.5, 1.1]])

    def test_loss_kind_validation(self):
        with pytest.raises(ValueError):
            LossKind("nope")
        with pytest.raises(ValueError):
            LossKind("correntropy")
        LossKind("correntropy", sigma=1.0)


class TestReconstruct:
    def test_identity_factor(self, rng):
        X = rng.random((4, 5))
        assert np.array_equal(reconstruct(np.eye(4), X), X)

    def test_single_endmember_broadcasts(self, rng):
        m = rng.random((6, 1))
        A = np.ones((1, 3))
        out = reconstruct(m, A)
        for n in range(3):
            np.testing.assert_array_equal(out[:, n], m[:, 0])

    def test_binary_product_against_hand_oracle(self, rng):
        M = rng.integers(0, 2, size=(4, 2)).astype(float)
        A = rng.integers(0, 2, size=(2, 3)).astype(float)
        expected = np.zeros((4, 3))
        for i in range(4):
            for j in range(3):
                for k in range(2):
                    expected[i, j] += M[i, k] * A[k, j]
        np.testing.assert_array_equal(reconstruct(M, A), expected)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            reconstruct(np.ones((3, 2)), np.ones((3, 2)))

    def test_nonnegative_output(self, rng):
        for _ in range(20):
            M = rng.random((5, 3))
            A = rng.random((3, 7))
            assert (reconstruct(M, A) >= 0).all()


class TestLoss:
    def test_zero_residual_minima(self, rng):
        X = rng.random((4, 6))
        assert loss(X, X, "frobenius") == 0.0
        assert loss(X, X, "l21") == 0.0
        assert loss(X, X, "correntropy", sigma=0.7) == -4.0

    def test_scalar_residual(self):
        X = np.array([[2.0]])
        Z = np.array([[0.0]])
        assert loss(X, Z, "frobenius") == pytest.approx(2.0)
        assert loss(X, Z, "l21") == pytest.approx(2.0)

    def test_l21_row_norms(self):
        X = np.array([[3.0, 4.0], [0.0, 0.0]])
        Z = np.zeros((2, 2))
        assert loss(X, Z, "l21") == pytest.approx(5.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            loss(np.ones((2, 2)), np.ones((2, 3)), "frobenius")

    def test_corruption_growth_rates(self, rng):
        # One corrupted row: the row-norm loss grows linearly with the
        # corruption, the squared loss quadratically.
        X = rng.random((5, 8))
        direction = rng.random(8)
        base_fro = base_l21 = None
        for c in [1.0, 2.0, 4.0, 8.0]:
            Xc = X.copy()
            Xc[2] += c * direction
            fro = loss(X, Xc, "frobenius")
            l21 = loss(X, Xc, "l21")
            if base_fro is None:
                base_fro, base_l21 = fro, l21
                continue
            assert fro / base_fro == pytest.approx(c**2)
            assert l21 / base_l21 == pytest.approx(c)
            assert fro / base_fro > l21 / base_l21

    def test_correntropy_range(self, rng):
        X = rng.random((6, 4))
        Z = rng.random((6, 4))
        val = loss(X, Z, "correntropy", sigma=0.5)
        assert -6.0 <= val <= 0.0


class TestProjectSumToOne:
    def test_halves(self):
        out = project_sum_to_one(np.array([[2.0], [2.0]]))
        np.testing.assert_allclose(out, [[0.5], [0.5]])

    def test_idempotent(self, rng):
        A = rng.random((3, 5))
        once = project_sum_to_one(A)
        twice = project_sum_to_one(once)
        np.testing.assert_allclose(once, twice, atol=1e-15)

    def test_analytic_column(self):
        out = project_sum_to_one(np.array([[1.0], [2.0], [3.0]]))
        np.testing.assert_allclose(out[:, 0], [1 / 6, 2 / 6, 3 / 6])

    def test_preserves_argmax(self, rng):
        A = rng.random((4, 10)) + 0.01
        out = project_sum_to_one(A)
        np.testing.assert_array_equal(np.argmax(out, axis=0), np.argmax(A, axis=0))

    def test_zero_column_rejected(self):
        with pytest.raises(DegenerateColumnError):
            project_sum_to_one(np.array([[0.0, 1.0], [0.0, 1.0]]))

    def test_wrapper_roundtrip(self):
        A = AbundanceMatrix([[2.0], [2.0]])
        out = project_sum_to_one(A)
        assert isinstance(out, AbundanceMatrix)


class TestAugmentAsc:
    def test_appends_constant_row(self):
        X = np.zeros((2, 2))
        Xa, Ma = augment_asc(X, np.zeros((2, 3)), delta=1.0)
        np.testing.assert_array_equal(Xa[-1], [1.0, 1.0])
        np.testing.assert_array_equal(Ma[-1], [1.0, 1.0, 1.0])
        assert Xa.shape == (3, 2) and Ma.shape == (3, 3)

    def test_zero_delta_rejected(self):
        with pytest.raises(ValueError):
            augment_asc(np.ones((2, 2)), np.ones((2, 2)), delta=0.0)

    def test_nnls_on_augmented_system_lands_on_simplex(self, rng):
        # Large-delta augmentation against the independent QP oracle.
        from scipy.optimize import nnls

        M = rng.random((10, 3)) + 0.1
        a_true = np.array([0.2, 0.5, 0.3])
        x = M @ a_true + 0.01 * rng.standard_normal(10)
        Xa, Ma = augment_asc(x[:, None], M, delta=50.0)
        a_hat = nnls(Ma, Xa[:, 0])[0]
        assert abs(a_hat.sum() - 1.0) < 1e-4
        a_oracle = simplex_lsq_oracle(M, x)
        np.testing.assert_allclose(a_hat, a_oracle, atol=2e-4)
