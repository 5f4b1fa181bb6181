"""Maximize a concave quadratic 0.5 x'Hx + c'x (+ const) over a polyhedron.

The interior-point solve is delegated to Clarabel. Its answer is then polished on
the identified active set so that active constraints hold with equality, which is
what the KKT residual below measures against.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import clarabel
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import linprog, nnls

from .errors import InfeasibleError, QPSolveError
from .model import Polyhedron

log = logging.getLogger(__name__)

_SOLVED = {"Solved", "AlmostSolved"}
_INFEASIBLE = {"PrimalInfeasible", "AlmostPrimalInfeasible"}


def _settings() -> "clarabel.DefaultSettings":
    s = clarabel.DefaultSettings()
    s.verbose = False
    s.tol_gap_abs = 1e-11
    s.tol_gap_rel = 1e-11
    s.tol_feas = 1e-11
    s.tol_infeas_abs = 1e-10
    s.tol_infeas_rel = 1e-10
    s.tol_ktratio = 1e-9
    s.max_iter = 300
    return s


_SETTINGS = _settings()
_RETRY_SETTINGS = _settings()
_RETRY_SETTINGS.static_regularization_constant = 1e-7


@dataclass(frozen=True, eq=False)
class ConcaveQP:
    H: np.ndarray
    c: np.ndarray
    poly: Polyhedron
    const: float = 0.0

    def value(self, x) -> float:
        return float(0.5 * x @ self.H @ x + self.c @ x + self.const)

    def gradient(self, x) -> np.ndarray:
        return self.H @ x + self.c

    def max_eig(self) -> float:
        return float(np.linalg.eigvalsh((self.H + self.H.T) / 2)[-1])


@dataclass
class QPResult:
    x: np.ndarray
    value: float
    converged: bool
    polished: bool
    iterations: int


def _polish(prob: ConcaveQP, x: np.ndarray, z: np.ndarray):
    """Re-solve the equality-constrained QP on the active set guessed from (x, z)."""
    poly = prob.poly
    n = poly.n
    slack = poly.slack(x) if len(poly.h) else np.zeros(0)
    scale = 1.0 + np.abs(poly.h)
    J = np.flatnonzero((slack <= 1e-7 * scale) | (z > np.maximum(slack, 1e-12)))
    C = np.vstack([poly.E, poly.G[J]])
    d = np.concatenate([poly.f, poly.h[J]])
    k = C.shape[0]
    K = np.zeros((n + k, n + k))
    K[:n, :n] = -prob.H
    K[:n, n:] = C.T
    K[n:, :n] = C
    rhs = np.concatenate([prob.c, d])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sla.LinAlgWarning)
            sol = sla.solve(K, rhs, assume_a="sym", check_finite=False)
        if not np.all(np.isfinite(sol)):
            raise np.linalg.LinAlgError
    except (np.linalg.LinAlgError, sla.LinAlgWarning, ValueError):
        sol = sla.lstsq(K, rhs, lapack_driver="gelsy", check_finite=False)[0]
    xp = sol[:n]
    mu = sol[n + poly.E.shape[0]:]
    if poly.violation(xp) > 1e-10 * (1.0 + np.abs(xp).max()):
        return None
    if len(mu) and mu.min() < -1e-8 * (1.0 + np.abs(mu).max()):
        return None
    return xp


def _usable(poly: Polyhedron, x) -> bool:
    return bool(np.all(np.isfinite(x))) and poly.violation(x) <= 1e-6 * (1.0 + np.abs(x).max())


def _has_point(poly: Polyhedron) -> bool:
    """LP feasibility check, used only when the interior-point solve breaks down."""
    res = linprog(
        np.zeros(poly.n), A_ub=poly.G if len(poly.h) else None, b_ub=poly.h if len(poly.h) else None,
        A_eq=poly.E if poly.E.shape[0] else None, b_eq=poly.f if poly.E.shape[0] else None,
        bounds=(None, None), method="highs",
    )
    return res.status != 2


def maximize(prob: ConcaveQP, x0=None, kkt_tol: float = 1e-8) -> QPResult:
    """Maximize ``prob``; raises :class:`InfeasibleError` if the polyhedron is empty.

    When ``x0`` is given it must be feasible, and the returned value is never
    below the objective at ``x0``.
    """
    poly = prob.poly
    n = poly.n
    if x0 is not None:
        x0 = np.asarray(x0, float)
        if poly.violation(x0) > 1e-6 * (1.0 + np.abs(x0).max()):
            raise InfeasibleError(f"starting point violates constraints by {poly.violation(x0):.2e}")
    Hs = -(prob.H + prob.H.T) / 2
    Pm = sp.csc_matrix(np.triu(Hs))
    k = poly.E.shape[0]
    m = poly.G.shape[0]
    Am = sp.csc_matrix(np.vstack([poly.E, poly.G]))
    bm = np.concatenate([poly.f, poly.h])
    cones = []
    if k:
        cones.append(clarabel.ZeroConeT(k))
    if m:
        cones.append(clarabel.NonnegativeConeT(m))
    for settings in (_SETTINGS, _RETRY_SETTINGS):
        sol = clarabel.DefaultSolver(Pm, -np.asarray(prob.c, float), Am, bm, cones, settings).solve()
        status = str(sol.status)
        if status in _INFEASIBLE:
            raise InfeasibleError("constraint set is empty")
        x = np.array(sol.x)
        converged = status in _SOLVED
        if converged or _usable(poly, x):
            break
    else:
        if not _has_point(poly):
            raise InfeasibleError("constraint set is empty")
        if x0 is None:
            raise QPSolveError(f"QP solve failed with status {status}")
    polished = False
    if converged or _usable(poly, x):
        xp = _polish(prob, x, np.array(sol.z)[k:])
        if xp is not None and prob.value(xp) >= prob.value(x) - 1e-10 * (1.0 + abs(prob.value(x))):
            x, polished = xp, True
    if not _usable(poly, x):
        if x0 is None:
            raise QPSolveError(f"QP solve failed with status {status}")
        x = x0.copy()
    if not converged:
        log.debug("concave QP terminated with status %s", status)
    val = prob.value(x)
    if x0 is not None and prob.value(x0) > val:
        x, val = x0.copy(), prob.value(x0)
    if log.isEnabledFor(logging.DEBUG):
        r = kkt_residual(prob, x)
        if r > kkt_tol:
            log.debug("concave QP answer has KKT residual %.2e above %.1e", r, kkt_tol)
    return QPResult(x, val, converged, polished, int(sol.iterations))


def kkt_residual(prob: ConcaveQP, x, active_tol: float = 1e-9) -> float:
    """Norm of the gradient projected onto the cone of feasible directions at ``x``.

    By Moreau's decomposition this equals the distance from the gradient to the
    normal cone spanned by active inequality rows (nonnegative multipliers) and
    the equality rows (free multipliers).
    """
    poly = prob.poly
    g = prob.gradient(np.asarray(x, float))
    J = np.flatnonzero(poly.slack(x) <= active_tol * (1.0 + np.abs(poly.h))) if len(poly.h) else []
    if poly.E.shape[0]:
        Z = sla.null_space(poly.E)
        g = Z.T @ g
        GJ = poly.G[J] @ Z
    else:
        GJ = poly.G[J]
    if len(J) == 0:
        return float(np.linalg.norm(g))
    return float(nnls(GJ.T, g, maxiter=50 * (len(J) + 10))[1])


def project(poly: Polyhedron, z) -> np.ndarray:
    """Euclidean projection of ``z`` onto ``poly``."""
    z = np.asarray(z, float)
    n = poly.n
    return maximize(ConcaveQP(-2.0 * np.eye(n), 2.0 * z, poly, -float(z @ z))).x
