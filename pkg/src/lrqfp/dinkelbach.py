"""Interpolated binary search (Ibaraki) for the root of the parametric function pi."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .model import (
    ProblemInstance,
    SolveOutcome,
    SolverConfig,
    Status,
    denominator,
    evaluate_objective,
    generalized_max_eig,
)
from .nonconvex_qp import solve_pi

log = logging.getLogger(__name__)

# oracle(lam) -> (pi(lam), maximizer, -d pi / d lam at the maximizer)
PiOracle = Callable[[float], tuple]


@dataclass
class DinkelbachState:
    lambda_l: float
    lambda_u: float
    pi_l: float
    pi_u: float
    x_u: Optional[np.ndarray]
    slope_u: float  # x_u'Px_u for the quadratic ratio
    history: list = field(default_factory=list)
    already_optimal: bool = False
    x_l: Optional[np.ndarray] = None


def step(state: DinkelbachState) -> float:
    """Next trial lambda, falling back to bisection when the interpolant leaves the bracket."""
    lo, hi = state.lambda_l, state.lambda_u
    dpi = (state.pi_u - state.pi_l) / (hi - lo)
    if state.slope_u + dpi != 0.0 and dpi != 0.0:
        lam = -state.pi_u / dpi + hi
    elif state.slope_u != 0.0:
        lam = state.pi_u / state.slope_u + hi
    else:
        lam = np.nan
    if not (lo < lam < hi):
        lam = 0.5 * (lo + hi)
    return float(lam)


def search(
    oracle: PiOracle,
    state: DinkelbachState,
    tol: float,
    max_rounds: int,
    sign_tol: float = 0.0,
    value: Optional[Callable] = None,
):
    """Shrink the bracket until |pi(lam)| < tol.

    Returns ``(best_x, best_value, rounds, converged)`` where best is taken over
    every maximizer seen, scored by ``value`` (defaults to lambda itself).
    """
    best_x, best_v = None, -np.inf

    def consider(x):
        nonlocal best_x, best_v
        if x is None or value is None:
            return
        v = value(x)
        if v > best_v:
            best_x, best_v = x, v

    consider(state.x_l)
    consider(state.x_u)
    rounds = 0
    while rounds < max_rounds:
        lam = step(state)
        pi, x, slope = oracle(lam)
        rounds += 1
        state.history.append((lam, pi))
        consider(x)
        if abs(pi) < tol:
            return best_x, best_v, rounds, True
        if pi > sign_tol:
            state.lambda_l, state.pi_l, state.x_l = lam, pi, x
        elif pi < -sign_tol:
            state.lambda_u, state.pi_u, state.x_u, state.slope_u = lam, pi, x, slope
        else:
            return best_x, best_v, rounds, True
        if state.lambda_u - state.lambda_l <= 1e-14 * max(1.0, abs(state.lambda_u)):
            return best_x, best_v, rounds, True
    return best_x, best_v, rounds, False


def _quadratic_oracle(inst: ProblemInstance, config: SolverConfig) -> PiOracle:
    def oracle(lam):
        res = solve_pi(inst, lam, config)
        return res.pi, res.x, denominator(inst, res.x)

    return oracle


def initial_bracket(inst: ProblemInstance, x_feas, config: SolverConfig = SolverConfig()) -> DinkelbachState:
    x_feas = np.asarray(x_feas, float)
    eps = config.eps
    f0 = evaluate_objective(inst, x_feas)
    lam_l = f0 - eps / 2
    res_l = solve_pi(inst, lam_l, config, x_start=x_feas)
    lam_u = generalized_max_eig(inst) + eps
    state = DinkelbachState(lam_l, lam_u, res_l.pi, np.nan, None, np.nan, [(lam_l, res_l.pi)], x_l=res_l.x)
    if res_l.pi < eps:
        state.already_optimal = True
        return state
    res_u = solve_pi(inst, lam_u, config)
    state.pi_u, state.x_u, state.slope_u = res_u.pi, res_u.x, denominator(inst, res_u.x)
    state.history.append((lam_u, res_u.pi))
    if not res_u.pi < 0:
        raise RuntimeError(f"pi({lam_u:g}) = {res_u.pi:g} is not negative above the Rayleigh bound")
    return state


def solve(inst: ProblemInstance, x_feas, config: SolverConfig = SolverConfig()) -> SolveOutcome:
    t0 = time.perf_counter()
    x_feas = np.asarray(x_feas, float)
    state = initial_bracket(inst, x_feas, config)
    F = lambda x: evaluate_objective(inst, x)  # noqa: E731
    candidates = [x_feas] + ([state.x_l] if state.x_l is not None else [])
    if state.already_optimal:
        x = max(candidates, key=F)
        return SolveOutcome(x, F(x), Status.GLOBAL_VERIFIED, wall_time=time.perf_counter() - t0,
                            algorithm="ibaraki", certificate=state.pi_l)
    best_x, best_v, rounds, ok = search(
        _quadratic_oracle(inst, config), state, config.eps, config.max_dinkelbach_rounds,
        sign_tol=2 * config.bb_gap, value=F,
    )
    for x in candidates:
        if F(x) > best_v:
            best_x, best_v = x, F(x)
    if not ok:
        log.warning("Dinkelbach search stopped after %d rounds without meeting the tolerance", rounds)
    return SolveOutcome(
        best_x, F(best_x), Status.GLOBAL_VERIFIED if ok else Status.STATIONARY_ONLY,
        dinkelbach_rounds=rounds, wall_time=time.perf_counter() - t0, algorithm="ibaraki",
        certificate=abs(state.history[-1][1]) if ok else None,
    )
