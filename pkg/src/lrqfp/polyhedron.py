"""Feasibility, interior points and sign-pattern regions over X = {Gx <= h, Ex = f}."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .concave_qp import ConcaveQP, maximize
from .errors import InfeasibleError, RegionCountOverflowError, UnboundedFeasibleSetError
from .model import Polyhedron

log = logging.getLogger(__name__)

REGULARIZER = 1e-6
SLACK_CAP = 1.0
DEFAULT_REGION_BUDGET = 1 << 20


SignPattern = tuple  # tuple of 0/1 ints, one per rank-one term


@dataclass(frozen=True, eq=False)
class Region:
    base: Polyhedron
    pattern: SignPattern
    sign_rows: np.ndarray  # row m is -sigma_m q_m, so sign_rows @ x <= 0 inside the region

    @property
    def signs(self) -> np.ndarray:
        """sigma_m = +1 where the pattern bit is 1, -1 where it is 0."""
        return 2.0 * np.asarray(self.pattern, float) - 1.0

    @property
    def polyhedron(self) -> Polyhedron:
        return self.base.with_rows(self.sign_rows, np.zeros(len(self.pattern)))


def make_region(base: Polyhedron, vectors: np.ndarray, pattern) -> Region:
    pattern = tuple(int(b) for b in pattern)
    sigma = 2.0 * np.asarray(pattern, float) - 1.0
    rows = -(sigma[:, None] * np.asarray(vectors, float)).reshape(len(pattern), base.n)
    return Region(base, pattern, rows)


def pattern_of(vectors: np.ndarray, x) -> SignPattern:
    """Sign pattern of x; a zero inner product counts as nonnegative."""
    x = np.asarray(x, float)
    t = vectors @ x
    tol = 1e-10 * np.linalg.norm(vectors, axis=1) * max(1.0, float(np.linalg.norm(x)))
    return tuple(int(v >= -tt) for v, tt in zip(t, tol))


def max_slack_point(poly: Polyhedron):
    """Approximate Chebyshev-style center: the point maximizing the smallest normalized slack.

    Returns ``(x, slack)``; ``x`` is None only when the equality constraints are inconsistent.
    """
    n = poly.n
    m = poly.G.shape[0]
    norms = np.linalg.norm(poly.G, axis=1)
    norms[norms == 0] = 1.0
    G = np.hstack([poly.G, norms[:, None]])
    G = np.vstack([G, np.r_[np.zeros(n), 1.0]])
    h = np.r_[poly.h, SLACK_CAP]
    E = np.hstack([poly.E, np.zeros((poly.E.shape[0], 1))])
    lifted = Polyhedron(G, h, E, poly.f)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    try:
        res = maximize(ConcaveQP(-2.0 * REGULARIZER * np.eye(n + 1), c, lifted))
    except InfeasibleError:
        return None, -np.inf
    x = res.x[:n]
    if poly.E.shape[0]:
        x = x - np.linalg.lstsq(poly.E, poly.E @ x - poly.f, rcond=None)[0]
        if np.abs(poly.E @ x - poly.f).max() > 1e-8 * (1.0 + np.abs(poly.f).max()):
            return None, -np.inf
    if m == 0:
        return x, np.inf
    slack = float(np.min((poly.h - poly.G @ x) / norms))
    return x, slack


def classify_polyhedron(poly: Polyhedron, delta_feas: float = 1e-7) -> str:
    """'interior', 'boundary-only' or 'empty'."""
    x, s = max_slack_point(poly)
    if x is None or s < -1e-9:
        return "empty"
    return "interior" if s >= delta_feas else "boundary-only"


def find_interior_point(poly: Polyhedron, delta_feas: float = 1e-7) -> Optional[np.ndarray]:
    """A point of ``poly`` whose smallest normalized inequality slack is at least ``delta_feas``."""
    x, s = max_slack_point(poly)
    if x is None or s < delta_feas:
        if x is not None and s >= -1e-9:
            log.debug("polyhedron is boundary-only (max slack %.3e)", s)
        return None
    return x


def linear_range(poly: Polyhedron, w) -> tuple:
    """(min, max) of w'x over ``poly``."""
    w = np.asarray(w, float)
    n = poly.n
    out = []
    for sgn in (-1.0, 1.0):
        res = maximize(ConcaveQP(np.zeros((n, n)), sgn * w, poly))
        if not res.converged or not np.all(np.isfinite(res.x)) or abs(res.value) > 1e12:
            raise UnboundedFeasibleSetError("feasible set is unbounded along a required direction")
        out.append(sgn * res.value)
    return out[0], out[1]


def enumerate_nonempty_regions(
    base: Polyhedron,
    vectors: np.ndarray,
    delta_feas: float = 1e-7,
    region_cap: int = 20,
    budget: int = DEFAULT_REGION_BUDGET,
):
    """All sign patterns whose region has an interior point, with that point.

    A half-space R_m^b without interior against X alone rules out every pattern
    with bit m equal to b before any pattern is tried.
    """
    vectors = np.asarray(vectors, float).reshape(-1, base.n)
    M = vectors.shape[0]
    if M > region_cap or 2**M > budget:
        raise RegionCountOverflowError(f"2^{M} sign patterns exceed the enumeration budget")
    allowed = []
    for m in range(M):
        bits = []
        for b in (0, 1):
            sigma = 1.0 if b else -1.0
            half = base.with_rows(-sigma * vectors[m], [0.0])
            if find_interior_point(half, delta_feas) is not None:
                bits.append(b)
        allowed.append(bits)
    out = []
    for pattern in itertools.product(*allowed):
        region = make_region(base, vectors, pattern)
        x = find_interior_point(region.polyhedron, delta_feas)
        if x is not None:
            out.append((region, x))
        else:
            log.debug("region %s skipped: no interior point", pattern)
    return out
