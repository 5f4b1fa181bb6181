"""Region-checking solvers: exact (with pi certificates), fast, rank-one, and the improvement check."""

from __future__ import annotations

import logging
import time
from typing import Optional

import numpy as np

from . import dinkelbach
from .concave_qp import ConcaveQP, maximize
from .decomposition import RankOneDecomposition, decompose, is_totally_nonnegative, ldl_decompose
from .errors import InfeasibleError
from .model import (
    ProblemInstance,
    RegionTrace,
    SolveOutcome,
    SolverConfig,
    Status,
    denominator,
    evaluate_objective,
)
from .nonconvex_qp import improvement_exists, solve_pi
from .polyhedron import (
    enumerate_nonempty_regions,
    linear_range,
    make_region,
    max_slack_point,
    pattern_of,
)
from .shen_yu import iterate

log = logging.getLogger(__name__)


def _starting_regions(inst: ProblemInstance, dec: RankOneDecomposition, config: SolverConfig):
    """Nonempty regions with interior points; a thin X falls back to the region of its max-slack point."""
    V = dec.vectors
    regions = enumerate_nonempty_regions(inst.polyhedron, V, config.delta_feas, config.region_cap)
    if regions:
        return regions
    x, slack = max_slack_point(inst.polyhedron)
    if x is None or slack < -1e-9:
        return []
    log.info("feasible set has no interior; using its max-slack point as the only start")
    return [(make_region(inst.polyhedron, V, pattern_of(V, x)), x)]


def _infeasible(algo: str, t0: float) -> SolveOutcome:
    return SolveOutcome(None, float("nan"), Status.INFEASIBLE, algorithm=algo, wall_time=time.perf_counter() - t0)


def solve_fast(
    inst: ProblemInstance, config: SolverConfig = SolverConfig(), dec: Optional[RankOneDecomposition] = None
) -> SolveOutcome:
    """One quadratic-transform run per nonempty region; best region wins."""
    t0 = time.perf_counter()
    dec = dec or decompose(inst, config)
    regions = _starting_regions(inst, dec, config)
    if not regions:
        return _infeasible("fast-region", t0)
    best_x, best_f = None, -np.inf
    traces = []
    for region, x0 in regions:
        sy = iterate(inst, dec.vectors, region, x0, config)
        traces.append(RegionTrace(region.pattern, sy.iterations, 0, sy.f, sy.history))
        if sy.f > best_f + 1e-9 * max(1.0, abs(best_f)) or best_x is None:
            best_x, best_f = sy.x, sy.f
    return SolveOutcome(
        best_x, evaluate_objective(inst, best_x), Status.STATIONARY_ONLY,
        regions_checked=len(regions), per_region=traces, wall_time=time.perf_counter() - t0,
        sy_iterations=sum(t.sy_iterations for t in traces), algorithm="fast-region",
    )


def solve_exact(
    inst: ProblemInstance, config: SolverConfig = SolverConfig(), dec: Optional[RankOneDecomposition] = None
) -> SolveOutcome:
    """Per region: quadratic-transform ascent, then pi(F(x*)); restart from an improving point until |pi| < eps.

    pi is decreasing, so once pi(lam0) < eps is proven every later lam >= lam0 is
    certified without another branch-and-bound, and a region stalled below the best
    known value restarts from that point (it already witnesses pi >= eps).
    """
    t0 = time.perf_counter()
    dec = dec or decompose(inst, config)
    V = dec.vectors
    regions = _starting_regions(inst, dec, config)
    if not regions:
        return _infeasible("region", t0)
    eps = config.eps
    certified = np.inf  # smallest lam with a proven pi(lam) < eps
    cert_bound = None
    best_x, best_f = None, -np.inf
    traces = []
    degraded = False
    for region, x0 in regions:
        x, reg = x0, region
        rounds = sy_its = 0
        history = []
        while True:
            rounds += 1
            sy = iterate(inst, V, reg, x, config)
            sy_its += sy.iterations
            history.extend(sy.history)
            lam = sy.f
            if best_x is None or lam > best_f:
                best_x, best_f = sy.x, lam
            if lam >= certified:
                break
            witness = (best_f - lam) * denominator(inst, best_x)
            if witness >= eps:
                x_next = best_x
            else:
                try:
                    res = solve_pi(inst, lam, config, x_start=sy.x, stop_below=eps)
                except Exception as exc:  # noqa: BLE001 - degrade, keep the stationary point
                    log.warning("pi evaluation failed at lam=%g: %s", lam, exc)
                    degraded = True
                    break
                if res.upper < eps:
                    if lam < certified:
                        certified, cert_bound = lam, res.upper
                    break
                if not res.converged:
                    degraded = True
                if res.pi <= 0:
                    degraded = True
                    break
                x_next = res.x
            if rounds >= config.max_dinkelbach_rounds:
                degraded = True
                break
            x = x_next
            reg = make_region(inst.polyhedron, V, pattern_of(V, x))
        traces.append(RegionTrace(region.pattern, sy_its, rounds, lam, history))
    verified = best_f >= certified and not (degraded and best_f < certified)
    return SolveOutcome(
        best_x, evaluate_objective(inst, best_x),
        Status.GLOBAL_VERIFIED if verified else Status.STATIONARY_ONLY,
        regions_checked=len(regions), per_region=traces, wall_time=time.perf_counter() - t0,
        dinkelbach_rounds=sum(t.dinkelbach_rounds for t in traces),
        sy_iterations=sum(t.sy_iterations for t in traces), algorithm="region",
        certificate=cert_bound if verified else None,
    )


def restrict(inst: ProblemInstance, region) -> ProblemInstance:
    """The instance with X replaced by X intersected with the region."""
    A = np.vstack([inst.A, region.sign_rows])
    b = np.r_[inst.b, np.zeros(len(region.pattern))]
    return ProblemInstance(inst.Q, inst.P, A, b, inst.E, inst.f, inst.lb, inst.ub)


def solve_in_region(
    inst: ProblemInstance, vectors, region, x0, config: SolverConfig = SolverConfig()
) -> RegionTrace:
    """Alternate ascent and pi checks with pi taken over the region alone.

    This treats one region as a problem of its own, which is how the single-region
    timing experiment counts rounds; ``solve_exact`` instead checks pi over all of X.
    """
    sub = restrict(inst, region)
    x, rounds, sy_its, history = x0, 0, 0, []
    while True:
        rounds += 1
        sy = iterate(inst, vectors, region, x, config)
        sy_its += sy.iterations
        history.extend(sy.history)
        res = solve_pi(sub, sy.f, config, x_start=sy.x, stop_below=config.eps)
        if res.upper < config.eps or res.pi <= 0 or rounds >= config.max_dinkelbach_rounds:
            break
        x = res.x
    return RegionTrace(region.pattern, sy_its, rounds, sy.f, history)


# -- rank-one path ---------------------------------------------------------------


def sqrt_ratio_pi(inst: ProblemInstance, q, sigma: float, poly, lam: float, x_start, max_steps: int = 500):
    """max sigma<q,x> - lam sqrt(x'Px) over ``poly`` by majorization.

    sqrt(D) <= (D0 + D) / (2 sqrt(D0)) with equality at D = D0, so each step
    maximizes a concave quadratic minorant that touches the objective at the
    current point.
    """
    q = np.asarray(q, float)
    P = inst.P
    x = np.asarray(x_start, float)

    def h(z):
        return float(sigma * q @ z - lam * np.sqrt(z @ P @ z))

    hx = h(x)
    for _ in range(max_steps):
        r0 = float(np.sqrt(x @ P @ x))
        prob = ConcaveQP(-(lam / r0) * P, sigma * q, poly, -lam * r0 / 2)
        x1 = maximize(prob, x0=x if poly.contains(x, 1e-7) else None).x
        h1 = h(x1)
        if h1 <= hx + 1e-15 * max(1.0, abs(hx)):
            break
        x, hx = x1, h1
    return hx, x, float(np.sqrt(x @ P @ x))


def solve_rank_one(
    inst: ProblemInstance, config: SolverConfig = SolverConfig(), dec: Optional[RankOneDecomposition] = None
) -> SolveOutcome:
    """Q = qq': maximize the concave-convex ratio sigma<q,x>/sqrt(x'Px) in each half of X, then square."""
    t0 = time.perf_counter()
    dec = dec or decompose(inst, config)
    if dec.rank != 1:
        raise ValueError(f"rank-one path needs a rank-one decomposition, got M = {dec.rank}")
    q = dec.vectors[0]
    regions = _starting_regions(inst, dec, config)
    if not regions:
        return _infeasible("rank-one", t0)
    try:
        ratio_cap = float(np.sqrt(q @ np.linalg.solve(inst.P, q)))
    except np.linalg.LinAlgError:
        ratio_cap = float(np.linalg.norm(q) / np.sqrt(np.linalg.eigvalsh(inst.P)[0]))
    tol = config.rank_one_tol
    best_x, best_r = None, -np.inf
    traces = []
    all_ok = True
    for region, x0 in regions:
        sigma = float(region.signs[0])
        poly = region.polyhedron

        def ratio(z, sigma=sigma):
            return float(sigma * q @ z / np.sqrt(z @ inst.P @ z))

        lam_l = ratio(x0)
        pi_l, x_l, _ = sqrt_ratio_pi(inst, q, sigma, poly, lam_l, x0)
        rounds = 0
        if pi_l < tol:
            xr, r, ok = (x_l if ratio(x_l) > lam_l else x0), max(ratio(x_l), lam_l), True
        else:
            lam_u = ratio_cap * (1 + 1e-9) + tol
            pi_u, x_u, s_u = sqrt_ratio_pi(inst, q, sigma, poly, lam_u, x_l)
            state = dinkelbach.DinkelbachState(lam_l, lam_u, pi_l, pi_u, x_u, s_u, x_l=x_l)

            def warm_oracle(lam, sigma=sigma, poly=poly, state=state):
                return sqrt_ratio_pi(inst, q, sigma, poly, lam, state.x_l)

            xr, r, rounds, ok = dinkelbach.search(
                warm_oracle, state, tol, config.max_dinkelbach_rounds, value=ratio
            )
            for cand in (x0, x_l):
                if ratio(cand) > r:
                    xr, r = cand, ratio(cand)
        all_ok &= ok
        traces.append(RegionTrace(region.pattern, 0, rounds, r * r))
        if r > best_r:
            best_x, best_r = xr, r
    return SolveOutcome(
        best_x, evaluate_objective(inst, best_x),
        Status.GLOBAL_VERIFIED if all_ok else Status.STATIONARY_ONLY,
        regions_checked=len(regions), per_region=traces, wall_time=time.perf_counter() - t0,
        dinkelbach_rounds=sum(t.dinkelbach_rounds for t in traces), algorithm="rank-one",
    )


# -- global check and dispatch ---------------------------------------------------


def verify_or_improve(inst: ProblemInstance, x_star, config: SolverConfig = SolverConfig()) -> Optional[np.ndarray]:
    """A feasible point beating ``x_star`` by the Dinkelbach margin eps, or None if none exists."""
    lam = evaluate_objective(inst, x_star)
    return improvement_exists(inst, lam, config.eps, config)


def _in_nonnegative_orthant(inst: ProblemInstance) -> bool:
    if inst.lb is not None and (inst.lb >= 0).all():
        return True
    n = inst.n
    try:
        return all(linear_range(inst.polyhedron, np.eye(n)[i])[0] >= -1e-12 for i in range(n))
    except Exception:  # noqa: BLE001
        return False


def feasible_point(inst: ProblemInstance) -> np.ndarray:
    x, slack = max_slack_point(inst.polyhedron)
    if x is None or slack < -1e-9:
        raise InfeasibleError("feasible set is empty")
    return x


def solve(inst: ProblemInstance, config: SolverConfig = SolverConfig()) -> SolveOutcome:
    algo = config.algorithm
    if algo == "ibaraki":
        try:
            x0 = feasible_point(inst)
        except InfeasibleError:
            return _infeasible("ibaraki", time.perf_counter())
        return dinkelbach.solve(inst, x0, config)
    if algo == "auto":
        dec = decompose(inst, config)
        if dec.rank == 1:
            return solve_rank_one(inst, config, dec)
        if is_totally_nonnegative(inst.Q) and _in_nonnegative_orthant(inst):
            return solve_fast(inst, config, ldl_decompose(inst.Q, config.pivot_tol))
        return solve_exact(inst, config, dec)
    dec = decompose(inst, config)
    if algo == "rank-one":
        return solve_rank_one(inst, config, dec)
    if algo == "fast-region":
        return solve_fast(inst, config, dec)
    return solve_exact(inst, config, dec)
