import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrqfp.decomposition import (
    decompose,
    eigen_decompose,
    is_totally_nonnegative,
    ldl_decompose,
)
from lrqfp.errors import DecompositionError
from lrqfp.generator import GeneratorSpec, generate
from lrqfp.model import SolverConfig

from conftest import simplex


class TestEigen:
    def test_diagonal(self):
        d = eigen_decompose(np.diag([2.0, 0.0]))
        assert d.rank == 1
        np.testing.assert_allclose(np.abs(d.vectors[0]), [np.sqrt(2), 0.0], atol=1e-14)

    def test_all_ones(self):
        d = eigen_decompose(np.ones((2, 2)))
        assert d.rank == 1
        np.testing.assert_allclose(np.outer(d.vectors[0], d.vectors[0]), np.ones((2, 2)), atol=1e-14)
        np.testing.assert_allclose(np.abs(d.vectors[0]), [1.0, 1.0], atol=1e-14)

    def test_identity(self):
        d = eigen_decompose(np.eye(2))
        assert d.rank == 2
        np.testing.assert_allclose(d.reconstruct(), np.eye(2), atol=1e-14)

    def test_negative_eigenvalue_is_rejected(self):
        with pytest.raises(DecompositionError):
            eigen_decompose(np.diag([1.0, -0.5]))

    def test_sign_convention(self):
        d = eigen_decompose(np.ones((3, 3)) + np.eye(3))
        for q in d.vectors:
            assert q[np.flatnonzero(np.abs(q) > 1e-12)[0]] > 0

    @given(seed=st.integers(0, 10_000), n=st.integers(1, 8), data=st.data())
    def test_reconstruction(self, seed, n, data):
        M = data.draw(st.integers(1, n))
        X = np.random.default_rng(seed).random((M, n))
        Q = X.T @ X
        d = eigen_decompose(Q)
        assert d.rank <= M
        assert np.linalg.norm(d.reconstruct() - Q) <= 1e-10 * max(1.0, np.linalg.norm(Q))


class TestLDL:
    def test_two_by_two(self):
        d = ldl_decompose(np.array([[4.0, 2.0], [2.0, 2.0]]))
        np.testing.assert_allclose(d.vectors, [[2.0, 1.0], [0.0, 1.0]], atol=1e-15)

    def test_rank_one_diagonal(self):
        d = ldl_decompose(np.diag([9.0, 0.0]))
        assert d.rank == 1
        np.testing.assert_allclose(d.vectors[0], [3.0, 0.0])

    def test_zero_matrix(self):
        assert ldl_decompose(np.zeros((3, 3))).rank == 0

    @given(seed=st.integers(0, 10_000), n=st.integers(1, 8), data=st.data())
    def test_reconstruction(self, seed, n, data):
        M = data.draw(st.integers(1, n))
        X = np.random.default_rng(seed).random((M, n))
        Q = X.T @ X
        d = ldl_decompose(Q)
        assert np.linalg.norm(d.reconstruct() - Q) <= 1e-8 * max(1.0, np.linalg.norm(Q))


class TestTotallyNonnegative:
    def test_examples(self):
        assert is_totally_nonnegative(np.array([[4.0, 2.0], [2.0, 2.0]]))
        assert not is_totally_nonnegative(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        assert is_totally_nonnegative(np.eye(2))

    def test_negative_minor(self):
        # nonnegative entries but a negative 2x2 minor [[1, 2], [1, 1]]
        Q = np.array([[2.0, 1.0, 2.0], [1.0, 2.0, 1.0], [2.0, 1.0, 2.0]])
        assert not is_totally_nonnegative(Q)

    def test_ldl_of_tn_matrix_has_nonnegative_columns(self):
        Q = np.array([[4.0, 2.0, 1.0], [2.0, 2.0, 1.0], [1.0, 1.0, 1.0]])
        assert is_totally_nonnegative(Q)
        assert (ldl_decompose(Q).vectors >= -1e-14).all()


class TestDispatch:
    def test_user_mode_uses_instance_vectors(self):
        inst = generate(GeneratorSpec(5, 5, 2, seed=3, family="full_rank_tn", ub=0.5))
        d = decompose(inst, SolverConfig(decomp_mode="user"))
        assert d.mode == "user"
        np.testing.assert_array_equal(d.vectors, inst.decomp)

    def test_user_mode_without_vectors(self):
        inst = simplex(np.eye(2), np.eye(2))
        with pytest.raises(DecompositionError):
            decompose(inst, SolverConfig(decomp_mode="user"))
