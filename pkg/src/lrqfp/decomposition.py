"""Rank-one decompositions Q = sum_m q_m q_m' and structure detection."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DecompositionError
from .model import PSD_REL_TOL, ProblemInstance, SolverConfig

TN_EXACT_MAX_N = 8


@dataclass(frozen=True, eq=False)
class RankOneDecomposition:
    vectors: np.ndarray  # shape (M, n)
    mode: str

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.vectors.T @ self.vectors

    def projections(self, x) -> np.ndarray:
        """The inner products <q_m, x>."""
        return self.vectors @ x


def _check_psd(w: np.ndarray) -> None:
    lam_max = max(float(w[-1]), 0.0)
    if w[0] < -PSD_REL_TOL * lam_max:
        raise DecompositionError(f"Q has a significantly negative eigenvalue {w[0]:.3e}")


def eigen_decompose(Q, rank_tol: float = 1e-10) -> RankOneDecomposition:
    Q = np.asarray(Q, float)
    n = Q.shape[0]
    w, V = np.linalg.eigh((Q + Q.T) / 2)
    _check_psd(w)
    lam_max = max(float(w[-1]), 0.0)
    if lam_max == 0.0:
        return RankOneDecomposition(np.zeros((0, n)), "eigen")
    keep = np.flatnonzero(w > rank_tol * lam_max)[::-1]
    vecs = []
    for i in keep:
        v = V[:, i]
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if v[nz[0]] < 0:
            v = -v
        vecs.append(np.sqrt(w[i]) * v)
    return RankOneDecomposition(np.array(vecs).reshape(len(vecs), n), "eigen")


def _ldl_columns(Q: np.ndarray, pivot_tol: float):
    n = Q.shape[0]
    S = Q.copy()
    scale = max(1.0, float(np.abs(Q).max(initial=0.0)))
    cols = []
    for j in range(n):
        d = S[j, j]
        if d <= pivot_tol * scale:
            if np.abs(S[j:, j]).max(initial=0.0) > np.sqrt(pivot_tol) * scale:
                return None
            continue
        ell = S[:, j] / d
        ell[:j] = 0.0
        cols.append(np.sqrt(d) * ell)
        S = S - d * np.outer(ell, ell)
    return cols


def ldl_decompose(Q, pivot_tol: float = 1e-12) -> RankOneDecomposition:
    """q_m = sqrt(d_m) l_m from Q = L D L' without pivoting; zero pivots are skipped."""
    Q = (np.asarray(Q, float) + np.asarray(Q, float).T) / 2
    n = Q.shape[0]
    cols = _ldl_columns(Q, pivot_tol)
    if cols is None:
        shift = 1e-12 * max(1.0, float(np.abs(Q).max(initial=0.0)))
        cols = _ldl_columns(Q + shift * np.eye(n), pivot_tol)
        if cols is not None:
            R = np.zeros((n, n)) if not cols else np.array(cols).T @ np.array(cols)
            if np.linalg.norm(Q - R) > 1e-8 * max(1.0, np.linalg.norm(Q)):
                cols = None
        if cols is None:
            raise DecompositionError("LDL' pivot breakdown: Q is not positive semidefinite")
    return RankOneDecomposition(np.array(cols).reshape(len(cols), n), "ldl")


@dataclass(frozen=True)
class TNCheck:
    result: bool
    method: str  # "minors" or "ldl-columns"

    def __bool__(self) -> bool:
        return self.result


def is_totally_nonnegative(Q, tol: float = 1e-10) -> TNCheck:
    Q = np.asarray(Q, float)
    n = Q.shape[0]
    if n <= TN_EXACT_MAX_N:
        if Q.min(initial=0.0) < -tol:
            return TNCheck(False, "minors")
        for k in range(2, n + 1):
            for rows in combinations(range(n), k):
                sub = Q[rows, :]
                for cols in combinations(range(n), k):
                    if np.linalg.det(sub[:, cols]) < -tol:
                        return TNCheck(False, "minors")
        return TNCheck(True, "minors")
    try:
        dec = ldl_decompose(Q)
    except DecompositionError:
        return TNCheck(False, "ldl-columns")
    return TNCheck(bool(Q.min() >= -tol and (dec.vectors >= -1e-12).all()), "ldl-columns")


def decompose(inst: ProblemInstance, config: SolverConfig) -> RankOneDecomposition:
    if config.decomp_mode == "eigen":
        return eigen_decompose(inst.Q, config.rank_tol)
    if config.decomp_mode == "ldl":
        return ldl_decompose(inst.Q, config.pivot_tol)
    if inst.decomp is None:
        raise DecompositionError("decomposition mode 'user' requires a 'decomp' entry in the instance")
    vecs = np.asarray(inst.decomp, float)
    vecs = vecs[np.linalg.norm(vecs, axis=1) > 0]
    R = vecs.T @ vecs
    if np.linalg.norm(inst.Q - R) > 1e-8 * max(1.0, np.linalg.norm(inst.Q)):
        raise DecompositionError("user decomposition does not reproduce Q")
    return RankOneDecomposition(vecs, "user")
