import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrqfp.errors import DenominatorZeroError, MalformedInstanceError
from lrqfp.generator import GeneratorSpec, generate
from lrqfp.model import (
    ProblemInstance,
    SolverConfig,
    evaluate_objective,
    generalized_max_eig,
    objective_gradient,
    read_instance,
    validate,
    write_instance,
)

from conftest import simplex, small_instance


def box2(Q, P):
    return ProblemInstance(Q, P, np.zeros((0, 2)), np.zeros(0), lb=np.zeros(2), ub=np.ones(2))


class TestEvaluate:
    def test_equal_matrices_give_one(self):
        inst = box2(np.eye(2), np.eye(2))
        assert evaluate_objective(inst, [0.3, 0.7]) == pytest.approx(1.0, abs=1e-15)

    def test_rank_one_ratio(self):
        inst = box2(np.diag([1.0, 0.0]), np.eye(2))
        assert evaluate_objective(inst, [0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)

    def test_zero_point_is_rejected(self):
        inst = box2(np.eye(2), np.eye(2))
        with pytest.raises(DenominatorZeroError):
            evaluate_objective(inst, [0.0, 0.0])
        with pytest.raises(ZeroDivisionError):
            evaluate_objective(inst, [0.0, 0.0])

    @given(seed=st.integers(0, 10_000), scale=st.floats(1e-3, 1e3))
    def test_scale_invariant(self, seed, scale):
        inst = small_instance(seed, 4, 2)
        x = np.random.default_rng(seed).random(4) + 0.1
        assert evaluate_objective(inst, scale * x) == pytest.approx(evaluate_objective(inst, x), rel=1e-12)

    @given(seed=st.integers(0, 10_000))
    def test_bounded_by_generalized_eigenvalue(self, seed):
        inst = small_instance(seed, 5, 3)
        lam = generalized_max_eig(inst)
        X = np.random.default_rng(seed).standard_normal((50, 5))
        vals = [evaluate_objective(inst, x) for x in X]
        assert max(vals) <= lam * (1 + 1e-9)
        assert min(vals) >= -1e-12

    def test_gradient_matches_finite_differences(self):
        inst = small_instance(3, 5, 3)
        rng = np.random.default_rng(0)
        h = 1e-5
        for _ in range(20):
            x = rng.random(5) + 0.05
            g = objective_gradient(inst, x)
            fd = np.array([
                (evaluate_objective(inst, x + h * e) - evaluate_objective(inst, x - h * e)) / (2 * h)
                for e in np.eye(5)
            ])
            assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(g))


class TestInstance:
    def test_arrays_are_read_only(self):
        inst = small_instance(0, 3, 2)
        with pytest.raises(ValueError):
            inst.Q[0, 0] = 5.0

    def test_shape_mismatch(self):
        with pytest.raises(MalformedInstanceError):
            ProblemInstance(np.eye(2), np.eye(3), np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(MalformedInstanceError):
            ProblemInstance(np.eye(2), np.eye(2), np.ones((1, 3)), np.ones(1))

    def test_config_is_validated(self):
        with pytest.raises(ValueError):
            SolverConfig(eps=-1.0)
        with pytest.raises(ValueError):
            SolverConfig(algorithm="simplex")


class TestValidate:
    def test_indefinite_numerator(self):
        rep = validate(box2(np.diag([1.0, -0.1]), np.eye(2)))
        assert not rep.psd and not rep.ok

    def test_singular_denominator(self):
        rep = validate(box2(np.eye(2), np.diag([1.0, 0.0])))
        assert not rep.pd and not rep.ok

    def test_generated_instance_is_clean(self):
        rep = validate(generate(GeneratorSpec(10, 2, 10, seed=7)))
        assert rep.ok, rep.problems
        # sum x = 1 with x <= 0.1 in ten coordinates leaves the single point (0.1, ..., 0.1)
        assert rep.feasibility == "boundary-only"

    def test_empty_feasible_set(self):
        inst = ProblemInstance(np.eye(1), np.eye(1), [[1.0], [-1.0]], [-1.0, 0.0])
        assert validate(inst).feasibility == "empty"


class TestFileFormat:
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6))
    def test_round_trip_is_exact(self, seed, n):
        inst = small_instance(seed, n, min(2, n))
        back = read_instance(write_instance(inst))
        for name in ("Q", "P", "A", "b", "E", "f", "lb", "ub"):
            np.testing.assert_array_equal(getattr(back, name), getattr(inst, name))

    def test_round_trip_keeps_decomposition_and_infinite_bounds(self):
        inst = generate(GeneratorSpec(4, 4, 2, seed=1, family="full_rank_tn", ub=0.5))
        back = read_instance(write_instance(inst))
        np.testing.assert_array_equal(back.decomp, inst.decomp)
        open_box = ProblemInstance(np.eye(2), np.eye(2), [[1.0, 1.0]], [1.0], lb=[0.0, 0.0], ub=[np.inf, np.inf])
        assert np.all(np.isinf(read_instance(write_instance(open_box)).ub))

    def test_missing_denominator_is_malformed(self):
        doc = json.loads(write_instance(small_instance(0, 3, 1)))
        del doc["P"]
        with pytest.raises(MalformedInstanceError):
            read_instance(json.dumps(doc).encode())

    def test_bad_json_is_malformed(self):
        with pytest.raises(MalformedInstanceError):
            read_instance(b"{not json")

    def test_handwritten_document(self):
        text = b"""{"n": 2, "Q": [1, 0, 0, 0], "P": [1, 0, 0, 1], "A": [], "b": [],
                    "E": [1, 1], "f": [1], "lb": [0, 0], "ub": [0.6, 0.6]}"""
        want = simplex(np.diag([1.0, 0.0]), np.eye(2), ub=0.6)
        got = read_instance(text)
        for name in ("Q", "P", "E", "f", "lb", "ub"):
            np.testing.assert_array_equal(getattr(got, name), getattr(want, name))
        assert got.A.shape == (0, 2)
