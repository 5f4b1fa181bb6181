"""Problem data, solver configuration, objective evaluation and the instance file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DenominatorZeroError, MalformedInstanceError

TAU_PD = 1e-10
TAU_DENOM = 1e-14
PSD_REL_TOL = 1e-8


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if ndim == 2 and arr.size == 0:
        arr = arr.reshape(0, arr.shape[1] if arr.ndim == 2 else 0)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """The set ``{x : G x <= h, E x = f}``.

    Variable bounds are folded into ``G``/``h`` as ordinary rows; ``lb``/``ub``
    are kept alongside for consumers that want the box directly.
    """

    G: np.ndarray
    h: np.ndarray
    E: np.ndarray
    f: np.ndarray
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None

    @classmethod
    def build(cls, n, A=None, b=None, E=None, f=None, lb=None, ub=None) -> "Polyhedron":
        rows, rhs = [], []
        if A is not None and len(A):
            rows.append(np.asarray(A, float).reshape(-1, n))
            rhs.append(np.asarray(b, float).ravel())
        if lb is not None:
            lb = np.asarray(lb, float)
            fin = np.isfinite(lb)
            rows.append(-np.eye(n)[fin])
            rhs.append(-lb[fin])
        if ub is not None:
            ub = np.asarray(ub, float)
            fin = np.isfinite(ub)
            rows.append(np.eye(n)[fin])
            rhs.append(ub[fin])
        G = np.vstack(rows) if rows else np.zeros((0, n))
        h = np.concatenate(rhs) if rhs else np.zeros(0)
        if E is None or not len(E):
            E, f = np.zeros((0, n)), np.zeros(0)
        return cls(
            _frozen(G, 2), _frozen(h, 1),
            _frozen(np.asarray(E, float).reshape(-1, n), 2), _frozen(f, 1),
            None if lb is None else _frozen(lb, 1),
            None if ub is None else _frozen(ub, 1),
        )

    @property
    def n(self) -> int:
        return self.G.shape[1]

    def with_rows(self, G2, h2) -> "Polyhedron":
        """Return a copy with extra inequality rows appended."""
        G2 = np.asarray(G2, float).reshape(-1, self.n)
        return Polyhedron(
            _frozen(np.vstack([self.G, G2]), 2),
            _frozen(np.concatenate([self.h, np.asarray(h2, float).ravel()]), 1),
            self.E, self.f, self.lb, self.ub,
        )

    def slack(self, x) -> np.ndarray:
        return self.h - self.G @ x

    def violation(self, x) -> float:
        """Largest constraint violation (inequality excess or equality residual)."""
        v = 0.0
        if len(self.h):
            v = max(v, float(np.max(self.G @ x - self.h)))
        if len(self.f):
            v = max(v, float(np.max(np.abs(self.E @ x - self.f))))
        return v

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.violation(x) <= tol


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """max x'Qx / x'Px over {Ax <= b, Ex = f, lb <= x <= ub}."""

    Q: np.ndarray
    P: np.ndarray
    A: np.ndarray
    b: np.ndarray
    E: Optional[np.ndarray] = None
    f: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None
    decomp: Optional[np.ndarray] = None  # user rank-one vectors, shape (M, n)
    polyhedron: Polyhedron = field(init=False, repr=False)

    def __post_init__(self):
        Q = np.asarray(self.Q, float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise MalformedInstanceError(f"Q must be square, got shape {Q.shape}")
        n = Q.shape[0]

        def mat(val):
            arr = np.asarray(val, float)
            if arr.size == 0:
                return np.zeros((0, n))
            if arr.ndim != 2 or arr.shape[1] != n:
                raise MalformedInstanceError(f"matrix has shape {arr.shape}, expected (*, {n})")
            return arr

        def vec(name, val, size):
            arr = np.asarray(val, float).ravel()
            if arr.size != size:
                raise MalformedInstanceError(f"{name} has {arr.size} entries, expected {size}")
            return arr

        P = np.asarray(self.P, float)
        if P.shape != (n, n):
            raise MalformedInstanceError(f"P has shape {P.shape}, expected {(n, n)}")
        A = mat(np.zeros((0, n)) if self.A is None else self.A)
        b = vec("b", np.zeros(0) if self.b is None else self.b, A.shape[0])
        E = f = None
        if self.E is not None and np.size(self.E):
            E = mat(self.E)
            f = vec("f", self.f, E.shape[0])
        lb = None if self.lb is None else vec("lb", self.lb, n)
        ub = None if self.ub is None else vec("ub", self.ub, n)
        decomp = None if self.decomp is None else mat(self.decomp)
        for name, val in (("Q", Q), ("P", P), ("A", A), ("b", b), ("E", E), ("f", f),
                          ("lb", lb), ("ub", ub), ("decomp", decomp)):
            object.__setattr__(self, name, None if val is None else _frozen(val, val.ndim))
        object.__setattr__(self, "polyhedron", Polyhedron.build(n, A, b, E, f, lb, ub))

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def T(self) -> int:
        return self.A.shape[0]


class Status(str, Enum):
    GLOBAL_VERIFIED = "global_verified"
    STATIONARY_ONLY = "stationary_only"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1e-3
    delta_feas: float = 1e-7
    bb_gap: float = 1e-6
    sy_tol: float = 1e-8
    max_sy_iters: int = 500
    max_dinkelbach_rounds: int = 100
    max_bb_nodes: int = 50_000
    decomp_mode: str = "eigen"
    algorithm: str = "auto"
    kkt_tol: float = 1e-8
    rank_tol: float = 1e-10
    pivot_tol: float = 1e-12
    region_cap: int = 20
    # the square-root ratio path runs its own Dinkelbach to this tolerance
    rank_one_tol: float = 1e-10

    def __post_init__(self):
        for name in ("eps", "delta_feas", "bb_gap", "sy_tol", "kkt_tol", "rank_tol", "rank_one_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("max_sy_iters", "max_dinkelbach_rounds", "max_bb_nodes", "region_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.decomp_mode not in ("eigen", "ldl", "user"):
            raise ValueError(f"unknown decomposition mode {self.decomp_mode!r}")
        if self.algorithm not in ("auto", "ibaraki", "region", "fast-region", "rank-one"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class RegionTrace:
    pattern: tuple
    sy_iterations: int
    dinkelbach_rounds: int
    value: float
    history: list = field(default_factory=list)


@dataclass
class SolveOutcome:
    x_star: Optional[np.ndarray]
    f_star: float
    status: Status
    regions_checked: int = 0
    per_region: list = field(default_factory=list)
    wall_time: float = 0.0
    dinkelbach_rounds: int = 0
    sy_iterations: int = 0
    algorithm: str = ""
    certificate: Optional[float] = None  # upper bound on pi(f_star) when verified

    def to_dict(self) -> dict:
        return {
            "x": None if self.x_star is None else [float(v) for v in self.x_star],
            "f": self.f_star if np.isfinite(self.f_star) else None,
            "status": self.status.value,
            "regions": self.regions_checked,
            "trace": [
                {
                    "pattern": "".join(str(b) for b in r.pattern),
                    "sy_iterations": r.sy_iterations,
                    "dinkelbach_rounds": r.dinkelbach_rounds,
                    "value": r.value,
                }
                for r in self.per_region
            ],
        }


def denominator(inst: ProblemInstance, x) -> float:
    x = np.asarray(x, float)
    return float(x @ inst.P @ x)


def evaluate_objective(inst: ProblemInstance, x) -> float:
    x = np.asarray(x, float)
    if x.shape != (inst.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({inst.n},)")
    d = float(x @ inst.P @ x)
    if d <= TAU_DENOM:
        raise DenominatorZeroError(f"x'Px = {d:.3e} is not positive; F is undefined at x ~ 0")
    return float(x @ inst.Q @ x) / d


def objective_gradient(inst: ProblemInstance, x) -> np.ndarray:
    x = np.asarray(x, float)
    Qx, Px = inst.Q @ x, inst.P @ x
    d = float(x @ Px)
    if d <= TAU_DENOM:
        raise DenominatorZeroError(f"x'Px = {d:.3e} is not positive")
    return 2.0 * (Qx * d - float(x @ Qx) * Px) / d**2


def generalized_max_eig(inst: ProblemInstance) -> float:
    """Largest eigenvalue of P^{-1} Q, i.e. the Rayleigh bound on F."""
    from scipy.linalg import eigh

    w = eigh(inst.Q, inst.P, eigvals_only=True)
    return float(max(w[-1], 0.0))


@dataclass
class ValidationReport:
    n: int
    symmetric_Q: bool
    symmetric_P: bool
    q_min_eig: float
    q_max_eig: float
    p_min_eig: float
    psd: bool
    pd: bool
    feasibility: str  # "interior", "boundary-only" or "empty"
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def validate(inst: ProblemInstance, delta_feas: float = 1e-7) -> ValidationReport:
    from .polyhedron import classify_polyhedron

    problems = []
    symQ = bool(np.allclose(inst.Q, inst.Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(inst.Q).max(initial=0))))
    symP = bool(np.allclose(inst.P, inst.P.T, rtol=0, atol=1e-12 * max(1.0, np.abs(inst.P).max(initial=0))))
    if not symQ:
        problems.append("Q is not symmetric")
    if not symP:
        problems.append("P is not symmetric")
    wq = np.linalg.eigvalsh((inst.Q + inst.Q.T) / 2)
    wp = np.linalg.eigvalsh((inst.P + inst.P.T) / 2)
    tau_psd = PSD_REL_TOL * max(wq[-1], 0.0)
    psd = bool(wq[0] >= -tau_psd)
    pd = bool(wp[0] >= TAU_PD)
    if not psd:
        problems.append(f"Q is not positive semidefinite (min eigenvalue {wq[0]:.3e})")
    if not pd:
        problems.append(f"P is not positive definite (min eigenvalue {wp[0]:.3e})")
    if inst.decomp is not None and len(inst.decomp):
        R = inst.decomp.T @ inst.decomp
        err = np.linalg.norm(inst.Q - R) / max(1.0, np.linalg.norm(inst.Q))
        if err > 1e-8:
            problems.append(f"user decomposition does not reproduce Q (relative error {err:.2e})")
    feas = classify_polyhedron(inst.polyhedron, delta_feas)
    if feas == "empty":
        problems.append("feasible set is empty")
    return ValidationReport(
        inst.n, symQ, symP, float(wq[0]), float(wq[-1]), float(wp[0]), psd, pd, feas, problems
    )


# -- instance file format -------------------------------------------------------


def _num(v: float) -> str:
    v = float(v)
    if np.isfinite(v):
        return format(v, ".17g")
    return '"inf"' if v > 0 else '"-inf"'


def _arr(a) -> str:
    return "[" + ", ".join(_num(v) for v in np.asarray(a, float).ravel()) + "]"


def write_instance(inst: ProblemInstance) -> bytes:
    """Serialize to the JSON instance format (doubles printed with 17 significant digits)."""
    parts = [f'"n": {inst.n}', f'"Q": {_arr(inst.Q)}', f'"P": {_arr(inst.P)}',
             f'"A": {_arr(inst.A)}', f'"b": {_arr(inst.b)}']
    if inst.E is not None:
        parts += [f'"E": {_arr(inst.E)}', f'"f": {_arr(inst.f)}']
    if inst.lb is not None:
        parts.append(f'"lb": {_arr(inst.lb)}')
    if inst.ub is not None:
        parts.append(f'"ub": {_arr(inst.ub)}')
    if inst.decomp is not None:
        parts.append('"decomp": [' + ", ".join(_arr(q) for q in inst.decomp) + "]")
    return ("{\n " + ",\n ".join(parts) + "\n}\n").encode("utf-8")


def instance_to_dict(inst: ProblemInstance) -> dict:
    return json.loads(write_instance(inst))


def _vec(doc, key, n=None):
    raw = doc[key]
    vals = [float(v) if v is not None else np.nan for v in raw]
    arr = np.array(vals, dtype=float)
    if n is not None and arr.size != n:
        raise MalformedInstanceError(f"'{key}' has {arr.size} entries, expected {n}")
    return arr


def instance_from_dict(doc: dict) -> ProblemInstance:
    if not isinstance(doc, dict):
        raise MalformedInstanceError("instance document must be a JSON object")
    for key in ("n", "Q", "P", "A", "b"):
        if key not in doc:
            raise MalformedInstanceError(f"instance document is missing '{key}'")
    try:
        n = int(doc["n"])
        Q = _vec(doc, "Q", n * n).reshape(n, n)
        P = _vec(doc, "P", n * n).reshape(n, n)
        A = _vec(doc, "A")
        if A.size % n:
            raise MalformedInstanceError("'A' length is not a multiple of n")
        A = A.reshape(-1, n)
        b = _vec(doc, "b", A.shape[0])
        E = f = None
        if "E" in doc and doc["E"]:
            E = _vec(doc, "E")
            if E.size % n:
                raise MalformedInstanceError("'E' length is not a multiple of n")
            E = E.reshape(-1, n)
            f = _vec(doc, "f", E.shape[0])
        lb = _vec(doc, "lb", n) if doc.get("lb") is not None else None
        ub = _vec(doc, "ub", n) if doc.get("ub") is not None else None
        decomp = None
        if doc.get("decomp") is not None:
            rows = [np.array(r, dtype=float) for r in doc["decomp"]]
            if any(r.shape != (n,) for r in rows):
                raise MalformedInstanceError("every 'decomp' vector must have length n")
            decomp = np.array(rows, dtype=float).reshape(len(rows), n)
    except (TypeError, ValueError, KeyError) as exc:
        raise MalformedInstanceError(str(exc)) from exc
    return ProblemInstance(Q, P, A, b, E, f, lb, ub, decomp)


def read_instance(data) -> ProblemInstance:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedInstanceError(f"not valid JSON: {exc}") from exc
    return instance_from_dict(doc)
