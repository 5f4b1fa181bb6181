"""Random instances in the style of the numerical experiments: sum(x) = 1, 0 <= x <= ub, Ax <= b."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProblemInstance

P_RIDGE = 1e-8


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    M: int
    T: int
    seed: int = 0
    family: str = "standard"  # or "full_rank_tn"
    ub: float = 0.1

    def __post_init__(self):
        if self.n < 1 or self.T < 0 or self.M < 0:
            raise ValueError("n must be positive and M, T nonnegative")
        if self.family not in ("standard", "full_rank_tn"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "standard" and self.M > self.n:
            raise ValueError("rank M cannot exceed n")
        if self.n * self.ub < 1.0 - 1e-12:
            raise ValueError(f"n*ub = {self.n * self.ub:g} < 1: sum(x) = 1 is infeasible")


def generate(spec: GeneratorSpec) -> ProblemInstance:
    n, T = spec.n, spec.T
    rng = np.random.default_rng(spec.seed)
    xbar = np.full(n, 1.0 / n)
    A = rng.random((T, n))
    b = rng.uniform(A @ xbar, 1.0)
    decomp = None
    if spec.family == "standard":
        X = rng.random((spec.M, n))
        Q = X.T @ X
    else:
        while True:
            qs = rng.random((n, n))
            if np.linalg.matrix_rank(qs) == n:
                break
        Q = qs.T @ qs
        decomp = qs
    Y = rng.random((n, n))
    P = Y.T @ Y + P_RIDGE * np.eye(n)
    return ProblemInstance(
        Q, P, A, b,
        E=np.ones((1, n)), f=np.ones(1),
        lb=np.zeros(n), ub=np.full(n, spec.ub),
        decomp=decomp,
    )
