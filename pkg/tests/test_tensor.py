import numpy as np
import pytest

from sar.tensor import (CapacityError, ShapeError, block_norms, block_rows, exp_elem,
                        hadamard, inner, kron, mat_of, norm2, norm_inf, norm_inf2,
                        spectral_norm, vec_of)


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_row_vectors(self):
        np.testing.assert_array_equal(kron([[1, 2]], [[3, 4]]), [[3, 4, 6, 8]])

    def test_zero(self):
        rng = np.random.default_rng(0)
        np.testing.assert_array_equal(kron(np.zeros((2, 3)), rng.standard_normal((2, 3))),
                                      np.zeros((4, 9)))

    def test_matches_numpy_kron(self):
        rng = np.random.default_rng(1)
        a, b = rng.standard_normal((3, 2)), rng.standard_normal((4, 5))
        np.testing.assert_array_equal(kron(a, b), np.kron(a, b))

    def test_entry_layout(self):
        rng = np.random.default_rng(2)
        n, d = 3, 2
        a1, a2 = rng.standard_normal((n, d)), rng.standard_normal((n, d))
        K = kron(a1, a2)
        for i1 in range(n):
            for i2 in range(n):
                for j1 in range(d):
                    for j2 in range(d):
                        assert K[i1 * n + i2, j1 * d + j2] == a1[i1, j1] * a2[i2, j2]

    def test_capacity(self):
        with pytest.raises(CapacityError):
            kron(np.ones((65, 2)), np.ones((2, 2)))
        with pytest.raises(CapacityError):
            kron(np.ones((2, 3)), np.ones((2, 3)), max_d=2)


class TestVecMat:
    def test_vec(self):
        np.testing.assert_array_equal(vec_of([[1, 2], [3, 4]]), [1, 2, 3, 4])

    def test_vec_row(self):
        np.testing.assert_array_equal(vec_of([[7, 8, 9]]), [7, 8, 9])

    def test_mat(self):
        np.testing.assert_array_equal(mat_of([1, 2, 3, 4], 2, 2), [[1, 2], [3, 4]])
        np.testing.assert_array_equal(mat_of([5], 1, 1), [[5]])

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((3, 3))
        np.testing.assert_array_equal(mat_of(vec_of(X), 3, 3), X)
        y = rng.standard_normal(12)
        np.testing.assert_array_equal(vec_of(mat_of(y, 3, 4)), y)

    def test_vec_is_view(self):
        X = np.arange(6.0).reshape(2, 3)
        assert np.shares_memory(vec_of(X), X)

    def test_mat_shape_error(self):
        with pytest.raises(ShapeError):
            mat_of([1, 2, 3], 2, 2)


class TestBlockRows:
    def test_identity_block(self):
        np.testing.assert_array_equal(block_rows(np.eye(4), 0, 2), [[1, 0, 0, 0], [0, 1, 0, 0]])

    def test_concatenation(self):
        rng = np.random.default_rng(4)
        A, x = rng.standard_normal((9, 4)), rng.standard_normal(4)
        stacked = np.concatenate([block_rows(A, j, 3) @ x for j in range(3)])
        np.testing.assert_allclose(stacked, A @ x, rtol=0, atol=1e-14)

    def test_n_one(self):
        A = np.array([[1.0, 2.0]])
        np.testing.assert_array_equal(block_rows(A, 0, 1), A)

    def test_index_error(self):
        with pytest.raises(IndexError):
            block_rows(np.eye(4), 2, 2)


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([1.0, -3.0, 2.0])) == pytest.approx(3.0, rel=1e-12)

    def test_identity(self):
        assert spectral_norm(np.eye(5)) == pytest.approx(1.0, rel=1e-12)

    def test_zero(self):
        assert spectral_norm(np.zeros((3, 4))) == 0.0

    def test_vs_eigensolve(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            M = rng.standard_normal((4, 4))
            oracle = np.sqrt(np.max(np.linalg.eigvalsh(M.T @ M)))
            assert spectral_norm(M) == pytest.approx(oracle, rel=1e-8)

    def test_wide_and_tall(self):
        rng = np.random.default_rng(6)
        for shape in [(3, 16), (16, 3), (1, 7), (7, 1)]:
            M = rng.standard_normal(shape)
            assert spectral_norm(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-9)

    def test_tiny_gap(self):
        # nearly repeated top singular value defeats plain power iteration
        M = np.diag([1.0, 1.0 - 1e-9, 0.5])
        assert spectral_norm(M) == pytest.approx(1.0, rel=1e-9)


class TestElementwise:
    def test_hadamard(self):
        np.testing.assert_array_equal(hadamard([1, 2], [3, 4]), [3, 8])

    def test_inner_with_ones(self):
        x = np.array([1.5, -2.0, 4.0])
        assert inner(x, np.ones(3)) == pytest.approx(3.5)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            hadamard([1, 2], [1, 2, 3])
        with pytest.raises(ShapeError):
            inner([1.0], [1.0, 2.0])

    def test_exp_inf_bound(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.standard_normal(6) * 3
            assert norm_inf(exp_elem(x)) <= np.exp(norm2(x))

    def test_norm_sandwich(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            u = rng.standard_normal(9)
            assert norm_inf(u) <= norm2(u) <= 3 * norm_inf(u)


class TestVectorizationIdentities:
    def test_kron_vec(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n, d = rng.integers(1, 6, size=2)
            A1, A2 = rng.standard_normal((n, d)), rng.standard_normal((n, d))
            X = rng.standard_normal((d, d))
            np.testing.assert_allclose(vec_of(A1 @ X @ A2.T), kron(A1, A2) @ vec_of(X),
                                       rtol=0, atol=1e-12)

    def test_diag_left_product(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            n = int(rng.integers(1, 6))
            A = np.diag(rng.standard_normal(n))
            B = rng.standard_normal((n, n))
            np.testing.assert_allclose(vec_of(A @ B), kron(A, np.eye(n)) @ vec_of(B),
                                       rtol=0, atol=1e-12)


def test_block_norms_and_gap():
    A = np.zeros((4, 3))
    Bm = A.copy()
    Bm[2:, :] = np.array([[3.0, 0, 0], [0, 4.0, 0]])
    np.testing.assert_allclose(block_norms(Bm, 2), [0.0, 4.0])
    assert norm_inf2(A, Bm, 2) == pytest.approx(4.0)
