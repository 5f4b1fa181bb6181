import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lrqfp.generator import GeneratorSpec, generate
from lrqfp.model import ProblemInstance

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def simplex(Q, P, ub=1.0, A=None, b=None):
    """{sum x = 1, 0 <= x <= ub} in dimension len(Q)."""
    Q = np.asarray(Q, float)
    n = Q.shape[0]
    if A is None:
        A, b = np.zeros((0, n)), np.zeros(0)
    return ProblemInstance(Q, np.asarray(P, float), A, b, E=np.ones((1, n)), f=np.ones(1),
                           lb=np.zeros(n), ub=np.full(n, ub))


def small_instance(seed: int, n: int, M: int, T: int = 3, family: str = "standard") -> ProblemInstance:
    return generate(GeneratorSpec(n, M, T, seed=seed, family=family, ub=min(1.0, 2.0 / n)))


@pytest.fixture
def segment():
    """q = (1, 0), P = I on {x1 + x2 = 1, 0 <= x <= 0.6}; optimum 0.36/0.52 at (0.6, 0.4)."""
    return simplex(np.diag([1.0, 0.0]), np.eye(2), ub=0.6)


@pytest.fixture
def equal_qp():
    """Q = P, so F is identically 1."""
    rng = np.random.default_rng(5)
    Y = rng.random((3, 3))
    P = Y.T @ Y + np.eye(3)
    return simplex(P, P)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
