import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrqfp.model import SolverConfig, generalized_max_eig
from lrqfp.nonconvex_qp import improvement_exists, solve_pi

from conftest import simplex, small_instance


class TestSolvePi:
    def test_vertex_maximum(self):
        inst = simplex(np.eye(2), np.eye(2))
        res = solve_pi(inst, 0.0)
        assert res.pi == pytest.approx(1.0, abs=1e-9)
        assert np.isclose(res.x, [1.0, 0.0], atol=1e-7).all() or np.isclose(res.x, [0.0, 1.0], atol=1e-7).all()

    def test_centre_minimum(self):
        inst = simplex(np.eye(2), np.eye(2))
        res = solve_pi(inst, 2.0)
        assert res.pi == pytest.approx(-0.5, abs=1e-9)
        np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-6)

    def test_equal_matrices(self, equal_qp):
        res = solve_pi(equal_qp, 1.0)
        assert abs(res.pi) <= SolverConfig().bb_gap
        assert res.upper >= res.pi

    def test_bounds_bracket_dense_grid(self):
        """Indefinite Q - lam P on the 2-simplex against a dense barycentric grid."""
        inst = simplex(np.array([[3.0, 1.0, 0.0], [1.0, 1.0, 0.5], [0.0, 0.5, 2.0]]),
                       np.array([[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.5]]))
        lam = 1.1
        k = 400
        i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1))
        mask = i + j <= k
        X = np.stack([i[mask], j[mask], k - i[mask] - j[mask]], axis=1) / k
        M = inst.Q - lam * inst.P
        grid = np.einsum("ij,jk,ik->i", X, M, X).max()
        res = solve_pi(inst, lam)
        assert res.upper >= grid - 1e-9
        assert res.pi >= grid - 1e-6  # grid pitch 1/400 and a smooth objective
        assert res.gap <= SolverConfig().bb_gap + 1e-12

    @given(seed=st.integers(0, 10_000))
    def test_decreasing_and_convex(self, seed):
        inst = small_instance(seed, 4, 2, T=2)
        gap = SolverConfig().bb_gap
        rng = np.random.default_rng(seed)
        l1, l2 = np.sort(rng.uniform(0.0, 1.2 * generalized_max_eig(inst), 2))
        p1, p2 = solve_pi(inst, l1).pi, solve_pi(inst, l2).pi
        pm = solve_pi(inst, 0.5 * (l1 + l2)).pi
        assert p1 > p2 - 2 * gap
        assert pm <= 0.5 * (p1 + p2) + 3 * gap

    def test_stop_below_still_bounds(self):
        inst = small_instance(2, 5, 3, T=3)
        lam = 0.5 * generalized_max_eig(inst)
        full = solve_pi(inst, lam)
        early = solve_pi(inst, lam, stop_below=full.pi + 10.0)
        assert early.upper >= full.pi - 1e-9


class TestImprovementExists:
    def test_equal_matrices(self, equal_qp):
        assert improvement_exists(equal_qp, 1.0, 1e-3) is None

    def test_vertex_improves(self):
        inst = simplex(np.diag([1.0, 0.0]), np.eye(2))
        x = improvement_exists(inst, 0.4, 0.1)
        assert x is not None
        assert x @ (inst.Q - 0.4 * inst.P) @ x >= 0.1 - 1e-12

    @given(seed=st.integers(0, 10_000))
    def test_above_rayleigh_bound(self, seed):
        inst = small_instance(seed, 4, 2)
        assert improvement_exists(inst, generalized_max_eig(inst) + 0.1, 1e-6) is None


@given(seed=st.integers(0, 10_000))
def test_sign_changes_at_the_optimal_ratio(seed):
    from lrqfp.oracle import grid_oracle

    inst = small_instance(seed, 3, 2, T=2)
    eps = SolverConfig().eps
    f_max = grid_oracle(inst, samples=20_000, seed=seed).f_best
    assert solve_pi(inst, f_max - eps).pi > 0
    assert solve_pi(inst, f_max + eps).pi < 0
