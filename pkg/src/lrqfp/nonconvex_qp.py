"""pi(lam) = max_{x in X} x'(Q - lam P)x by spatial branch-and-bound.

Q - lam P is split by eigendecomposition into a convex part sum_i t_i(x)^2, with
t_i = sqrt(mu_i) v_i'x over the k positive eigenvalues mu_i (k <= rank Q), and an
NSD remainder. Each node is a box L <= t <= U; replacing t_i^2 by its secant over
[L_i, U_i] overestimates the objective by a concave QP, so branching only happens
in the k-dimensional t-space.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .concave_qp import ConcaveQP, maximize
from .errors import InfeasibleError, QPSolveError
from .model import ProblemInstance, SolverConfig
from .polyhedron import linear_range

log = logging.getLogger(__name__)


@dataclass
class PiResult:
    pi: float  # best objective value found (a lower bound on the true maximum)
    x: np.ndarray
    upper: float  # proven upper bound on the maximum
    nodes: int
    converged: bool

    @property
    def gap(self) -> float:
        return self.upper - self.pi


@dataclass(order=True)
class BBNode:
    neg_upper: float
    seq: int
    lower_t: np.ndarray = None
    upper_t: np.ndarray = None
    x: np.ndarray = None

    @property
    def upper(self) -> float:
        return -self.neg_upper


class _PiProblem:
    def __init__(self, inst: ProblemInstance, lam: float):
        self.poly = inst.polyhedron
        M = inst.Q - lam * inst.P
        self.M = (M + M.T) / 2
        mu, V = np.linalg.eigh(self.M)
        tau = 1e-12 * max(1.0, np.abs(inst.Q).max(), abs(lam) * np.abs(inst.P).max())
        pos = mu > tau
        self.W = (np.sqrt(mu[pos]) * V[:, pos]).T  # (k, n)
        neg = np.minimum(mu, 0.0)
        neg[pos] = 0.0
        self.Mneg = (V * neg) @ V.T
        self.Mneg = (self.Mneg + self.Mneg.T) / 2
        self.k = self.W.shape[0]
        self.qp_calls = 0

    def f(self, x) -> float:
        return float(x @ self.M @ x)

    def relax(self, L, U):
        poly = self.poly.with_rows(np.vstack([self.W, -self.W]), np.r_[U, -L])
        prob = ConcaveQP(2.0 * self.Mneg, self.W.T @ (L + U), poly, -float(L @ U))
        self.qp_calls += 1
        res = maximize(prob)
        return res.x, res.value

    def ascend(self, x, max_steps: int = 20):
        """Local ascent by repeatedly linearizing the convex part at the current point."""
        fx = self.f(x)
        for _ in range(max_steps):
            t0 = self.W @ x
            prob = ConcaveQP(2.0 * self.Mneg, 2.0 * self.W.T @ t0, self.poly, -float(t0 @ t0))
            self.qp_calls += 1
            try:
                x1 = maximize(prob).x
            except InfeasibleError:
                break
            f1 = self.f(x1)
            if f1 <= fx + 1e-13 * max(1.0, abs(fx)):
                break
            x, fx = x1, f1
        return x, fx


def solve_pi(
    inst: ProblemInstance,
    lam: float,
    config: Optional[SolverConfig] = None,
    *,
    x_start=None,
    stop_below: Optional[float] = None,
    stop_above: Optional[float] = None,
) -> PiResult:
    """Global maximum of x'(Q - lam P)x over the instance's feasible set.

    ``stop_below`` ends the search once the global upper bound drops below it;
    ``stop_above`` ends it at the first incumbent reaching it.
    """
    config = config or SolverConfig()
    gap = config.bb_gap
    pb = _PiProblem(inst, lam)

    if pb.k == 0:
        prob = ConcaveQP(2.0 * pb.Mneg, np.zeros(inst.n), pb.poly)
        res = maximize(prob)
        x = res.x
        if x_start is not None and pb.f(np.asarray(x_start, float)) > pb.f(x):
            x = np.asarray(x_start, float)
        val = pb.f(x)
        return PiResult(val, x, max(val, res.value), 1, True)

    ranges = [linear_range(pb.poly, w) for w in pb.W]
    L0 = np.array([r[0] for r in ranges])
    U0 = np.array([r[1] for r in ranges])

    x_best, lb = None, -np.inf
    if x_start is not None:
        x_best = np.asarray(x_start, float)
        lb = pb.f(x_best)

    seq = 0
    heap: list = []
    closed_ub = -np.inf  # largest bound among nodes discarded within the gap

    def push(L, U, parent_ub=np.inf):
        nonlocal seq, x_best, lb, closed_ub
        try:
            x, ub = pb.relax(L, U)
        except InfeasibleError:
            return
        except QPSolveError:
            # the parent's bound still covers this box; split it blindly
            log.debug("relaxation failed on a node; keeping the parent bound")
            seq += 1
            heapq.heappush(heap, BBNode(-parent_ub, seq, L, U, None))
            return
        val = pb.f(x)
        if val > lb:
            x, val = pb.ascend(x)
            if val > lb:
                x_best, lb = x, val
        if ub > lb + gap:
            seq += 1
            heapq.heappush(heap, BBNode(-ub, seq, L, U, x))
        else:
            closed_ub = max(closed_ub, ub)

    push(L0, U0)
    if x_best is None and not heap:
        raise InfeasibleError("feasible set is empty")
    nodes = 1
    converged = True
    while heap:
        top = heap[0]
        if top.upper - lb <= gap:
            break
        if stop_below is not None and max(top.upper, closed_ub) < stop_below:
            break
        if stop_above is not None and lb >= stop_above:
            break
        if nodes >= config.max_bb_nodes:
            converged = False
            log.warning("branch-and-bound node budget exhausted at lam=%g (gap %.3e)", lam, top.upper - lb)
            break
        node = heapq.heappop(heap)
        if node.upper <= lb + gap:
            closed_ub = max(closed_ub, node.upper)
            continue
        widths = node.upper_t - node.lower_t
        if widths.max() < 1e-10:
            closed_ub = max(closed_ub, node.upper)
            continue
        if node.x is None:
            i = int(np.argmax(widths))
        else:
            t = pb.W @ node.x
            err = np.maximum((t - node.lower_t) * (node.upper_t - t), 0.0)
            i = int(np.argmax(err)) if err.max() > 0 else int(np.argmax(widths))
        mid = 0.5 * (node.lower_t[i] + node.upper_t[i])
        U_left = node.upper_t.copy()
        U_left[i] = mid
        L_right = node.lower_t.copy()
        L_right[i] = mid
        push(node.lower_t, U_left, node.upper)
        push(L_right, node.upper_t, node.upper)
        nodes += 2
    if x_best is None:
        raise QPSolveError(f"no feasible incumbent found at lam={lam:g}")
    upper = max(lb, closed_ub, heap[0].upper if heap else -np.inf)
    return PiResult(lb, x_best, upper, nodes, converged)


def improvement_exists(
    inst: ProblemInstance, lam: float, delta: float, config: Optional[SolverConfig] = None
) -> Optional[np.ndarray]:
    """A feasible x with x'(Q - lam P)x >= delta, or None if the search proves there is none."""
    res = solve_pi(inst, lam, config, stop_above=delta, stop_below=delta)
    if res.pi >= delta:
        return res.x
    if res.upper < delta:
        return None
    # budget exhausted with the question open
    log.warning("improvement check inconclusive at lam=%g (bounds %.3e, %.3e)", lam, res.pi, res.upper)
    return None
