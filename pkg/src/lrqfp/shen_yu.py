"""Quadratic-transform ascent inside one sign region.

With N_m(x) = <q_m, x>^2 and D(x) = x'Px the transform is
g(x, y) = sum_m 2 y_m |<q_m, x>| - y_m^2 x'Px. Inside a region the signs of the
inner products are fixed, the absolute values become linear, and maximizing g over
x for fixed y is a concave QP.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .concave_qp import ConcaveQP, maximize
from .errors import DenominatorZeroError
from .model import TAU_DENOM, ProblemInstance, SolverConfig, evaluate_objective
from .polyhedron import Region

log = logging.getLogger(__name__)


@dataclass
class TransformState:
    x: np.ndarray
    y: np.ndarray
    f_val: float
    signs: tuple


@dataclass
class SYResult:
    x: np.ndarray
    f: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def update_y(inst: ProblemInstance, vectors: np.ndarray, x) -> np.ndarray:
    """y_m = sqrt(N_m(x)) / D(x), the maximizer of g(x, .)."""
    x = np.asarray(x, float)
    d = float(x @ inst.P @ x)
    if d <= TAU_DENOM:
        raise DenominatorZeroError("x'Px vanishes; the transform weights are undefined")
    return np.abs(vectors @ x) / d


def transform_value(inst: ProblemInstance, vectors: np.ndarray, x, y) -> float:
    x = np.asarray(x, float)
    return float(2.0 * y @ np.abs(vectors @ x) - (y @ y) * (x @ inst.P @ x))


def _signed_transform(inst, vectors, sigma, x, y) -> float:
    return float(2.0 * (sigma * y) @ (vectors @ x) - (y @ y) * (x @ inst.P @ x))


def update_x(inst: ProblemInstance, vectors: np.ndarray, region: Region, x, y) -> np.ndarray:
    """Maximize the region's (concave) transform over x with y held fixed."""
    x = np.asarray(x, float)
    yy = float(y @ y)
    if yy == 0.0:
        return x
    sigma = region.signs
    poly = region.polyhedron
    prob = ConcaveQP(-2.0 * yy * inst.P, 2.0 * vectors.T @ (sigma * y), poly)
    start = x if poly.contains(x, 1e-7) else None
    x_new = maximize(prob, x0=start).x
    if _signed_transform(inst, vectors, sigma, x_new, y) < _signed_transform(inst, vectors, sigma, x, y):
        return x
    return x_new


def iterate(
    inst: ProblemInstance,
    vectors: np.ndarray,
    region: Region,
    x0,
    config: SolverConfig = SolverConfig(),
) -> SYResult:
    x = np.asarray(x0, float)
    f = evaluate_objective(inst, x)
    history = [f]
    converged = False
    it = moves = 0
    while it < config.max_sy_iters:
        it += 1
        y = update_y(inst, vectors, x)
        x_new = update_x(inst, vectors, region, x, y)
        try:
            f_new = evaluate_objective(inst, x_new)
        except DenominatorZeroError:
            converged = True
            break
        history.append(f_new)  # every computed iterate, so callers can audit monotonicity
        if f_new < f:
            # the transform step cannot lose ground except by rounding
            converged = f - f_new <= 1e-12 * max(1.0, f)
            break
        done = abs(f_new - f) <= config.sy_tol * max(1.0, f)
        moves += not done
        x, f = x_new, f_new
        if done:
            converged = True
            break
    if not converged:
        log.debug("quadratic-transform iteration hit the cap (%d) in region %s", config.max_sy_iters, region.pattern)
    # improving steps; a start that is already stationary counts the step that confirmed it
    return SYResult(x, f, max(1, moves), converged, history)
