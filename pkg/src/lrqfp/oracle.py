"""Brute-force reference values for small instances.

Sampling plus local polishing of F itself. Deliberately shares nothing with the
region solvers beyond the projection onto X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .concave_qp import project
from .model import TAU_DENOM, ProblemInstance, objective_gradient
from .polyhedron import linear_range, max_slack_point

VERTEX_LIMIT = 200_000


@dataclass
class OracleResult:
    f_best: float
    x_best: Optional[np.ndarray]
    feasible_samples: int
    flag: str = ""  # "infeasible-or-thin" when nothing feasible was found


def _values(inst: ProblemInstance, X: np.ndarray) -> np.ndarray:
    num = np.einsum("ij,jk,ik->i", X, inst.Q, X)
    den = np.einsum("ij,jk,ik->i", X, inst.P, X)
    out = np.full(len(X), -np.inf)
    ok = den > TAU_DENOM
    out[ok] = num[ok] / den[ok]
    return out


def _affine_frame(inst: ProblemInstance):
    """x = x0 + Z z parametrization of the equality constraints."""
    poly = inst.polyhedron
    n = inst.n
    if poly.E.shape[0]:
        x0 = np.linalg.lstsq(poly.E, poly.f, rcond=None)[0]
        Z = sla.null_space(poly.E)
    else:
        x0, Z = np.zeros(n), np.eye(n)
    return x0, Z


def _vertices(Gz: np.ndarray, hz: np.ndarray) -> np.ndarray:
    m, d = Gz.shape
    if d == 0 or m < d or math.comb(m, d) > VERTEX_LIMIT:
        return np.zeros((0, d))
    idx = np.array(list(combinations(range(m), d)))
    mats = Gz[idx]
    rhs = hz[idx]
    ok = np.abs(np.linalg.det(mats)) > 1e-12
    if not ok.any():
        return np.zeros((0, d))
    sols = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = (sols @ Gz.T <= hz + 1e-10).all(axis=1)
    return sols[feas]


def _hit_and_run(Gz, hz, z0, n_samples, rng, chains: int = 64):
    d = Gz.shape[1]
    if d == 0:
        return np.repeat(z0[None, :], 1, axis=0)
    steps = max(1, n_samples // chains)
    Z = np.repeat(z0[None, :], chains, axis=0)
    out = np.empty((steps * chains, d))
    for s in range(steps):
        U = rng.standard_normal((chains, d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        slack = hz[None, :] - Z @ Gz.T  # (chains, m)
        rate = U @ Gz.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = slack / rate
        hi = np.where(rate > 1e-14, t, np.inf).min(axis=1)
        lo = np.where(rate < -1e-14, t, -np.inf).max(axis=1)
        hi = np.minimum(hi, 1e6)
        lo = np.maximum(lo, -1e6)
        lo = np.minimum(lo, hi)
        Z = Z + (lo + rng.random(chains) * (hi - lo))[:, None] * U
        out[s * chains:(s + 1) * chains] = Z
    return out


def _polish(inst: ProblemInstance, x: np.ndarray, steps: int):
    """Projected gradient ascent on F with a backtracking step."""
    poly = inst.polyhedron
    f = _values(inst, x[None, :])[0]
    eta = 1.0 / max(1e-12, np.linalg.norm(objective_gradient(inst, x)))
    for _ in range(steps):
        g = objective_gradient(inst, x)
        while True:
            x1 = project(poly, x + eta * g)
            f1 = _values(inst, x1[None, :])[0]
            if f1 >= f + 1e-4 * g @ (x1 - x) or eta < 1e-14:
                break
            eta *= 0.5
        if f1 <= f + 1e-15 * max(1.0, abs(f)):
            break
        moved = np.linalg.norm(x1 - x)
        x, f = x1, f1
        eta *= 2.0
        if moved < 1e-12:
            break
    return x, f


def grid_oracle(
    inst: ProblemInstance,
    samples: int = 200_000,
    seed: int = 0,
    polish_top: int = 20,
    polish_steps: int = 500,
) -> OracleResult:
    rng = np.random.default_rng(seed)
    poly = inst.polyhedron
    x0, Z = _affine_frame(inst)
    Gz = poly.G @ Z
    hz = poly.h - poly.G @ x0
    d = Z.shape[1]
    xc, slack = max_slack_point(poly)
    if xc is None or slack < -1e-9:
        return OracleResult(-np.inf, None, 0, "infeasible-or-thin")
    pools = []

    # rejection sampling over the bounding box of the affine slice
    half = samples // 2
    if d:
        box = np.array([linear_range(poly, Z[:, j]) for j in range(d)]) - (Z.T @ x0)[:, None]
        drawn = 0
        while drawn < half:
            k = min(50_000, half - drawn)
            cand = box[:, 0] + rng.random((k, d)) * (box[:, 1] - box[:, 0])
            drawn += k
            keep = (cand @ Gz.T <= hz + 1e-12).all(axis=1)
            pools.append(cand[keep])

    # hit-and-run from the max-slack point
    zc = Z.T @ (xc - x0)
    pools.append(_hit_and_run(Gz, hz, zc, samples - half, rng))
    pools.append(zc[None, :])

    pools.append(_vertices(Gz, hz))
    Zs = np.vstack([p for p in pools if len(p)]) if any(len(p) for p in pools) else np.zeros((0, d))
    if not len(Zs):
        return OracleResult(-np.inf, None, 0, "infeasible-or-thin")
    X = x0[None, :] + Zs @ Z.T
    vals = _values(inst, X)
    finite = np.isfinite(vals)
    if not finite.any():
        return OracleResult(-np.inf, None, 0, "infeasible-or-thin")
    order = np.argsort(-np.where(finite, vals, -np.inf))
    best_x, best_f = X[order[0]], vals[order[0]]
    picked = []
    for i in order:
        if not finite[i]:
            break
        if all(np.linalg.norm(X[i] - X[j]) > 1e-6 for j in picked):
            picked.append(i)
        if len(picked) >= polish_top:
            break
    for i in picked:
        x, f = _polish(inst, X[i].copy(), polish_steps)
        if f > best_f:
            best_x, best_f = x, f
    return OracleResult(float(best_f), best_x, int(finite.sum()))
