"""Desk-scale versions of the experiment tables, written as CSV."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import astuple, dataclass, fields, replace
from typing import Iterable, Optional

import numpy as np

from .decomposition import decompose
from .generator import GeneratorSpec, generate
from .model import SolverConfig
from .polyhedron import enumerate_nonempty_regions
from .region_solver import solve, solve_fast, solve_in_region

log = logging.getLogger(__name__)

CSV_HEADER = (
    "instance_id,algo,n,M,T,wall_s,f_value,dinkelbach_rounds,sy_iterations,regions_checked,rel_error,status"
)
TABLES = ("t1", "t2", "t3", "t4", "t5")


@dataclass
class BenchRecord:
    instance_id: str
    algo: str
    n: int
    M: int
    T: int
    wall_s: float
    f_value: float
    dinkelbach_rounds: int
    sy_iterations: int
    regions_checked: int
    rel_error: float  # nan when the row has no reference
    status: str


def relative_error(f_ref: float, f: float) -> float:
    """(F(x_opt) - F(x)) / F(x_opt)."""
    if not (math.isfinite(f_ref) and math.isfinite(f)) or f_ref == 0:
        return float("nan")
    return (f_ref - f) / f_ref


def box_bound(n: int) -> float:
    """The experiments use 0.1, which needs n >= 10; smaller n gets 2/n."""
    return max(0.1, 2.0 / n)


def _cells(table: str, scale: str) -> list:
    """(n, M, T, family) tuples for one table."""
    full = scale == "paper"
    if table == "t1":
        ns, Ms = ((25, 50, 75), (2, 5, 7, 10)) if full else ((25, 50), (2, 5))
        return [(n, M, T, "standard") for n in ns for M in Ms for T in (1, 10, 30, 50)]
    if table == "t2":
        ns, Ms = ((10, 25, 50, 75), (2, 3, 4, 5, 7, 10)) if full else ((10, 25, 50), (2, 3, 4, 5))
        return [(n, M, 10, "standard") for n in ns for M in Ms]
    if table == "t3":
        if full:
            return [(n, 7, 10, "standard") for n in (250, 500, 750, 1000)]
        return [(n, 5, 10, "standard") for n in (50, 100, 200)]
    if table == "t4":
        ns, Ms = ((30, 50, 100, 150), (2, 3, 5, 7)) if full else ((10, 20), (2, 3))
        return [
            (n, M, T, "standard") for n in ns for M in Ms for T in (n // 2, n, 3 * n // 2, 2 * n, 5 * n // 2)
        ]
    if table == "t5":
        ns = (20, 35, 50) if full else (8, 12)
        return [(n, n, T, "full_rank_tn") for n in ns for T in (1, 10, 30, 50)]
    raise ValueError(f"unknown table {table!r}; expected one of {TABLES}")


def _seed(seed: int, n: int, M: int, T: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, n, M, T, trial]).generate_state(1)[0])


def _record(iid, algo, inst, M, T, outcome, wall, f_ref=float("nan")) -> BenchRecord:
    return BenchRecord(
        iid, algo, inst.n, M, T, wall, outcome.f_star, outcome.dinkelbach_rounds,
        outcome.sy_iterations, outcome.regions_checked, relative_error(f_ref, outcome.f_star),
        outcome.status.value,
    )


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def _run_t1(iid, inst, M, T, config) -> list:
    """One nonempty region, solved as a problem in its own right."""
    dec = decompose(inst, config)
    t0 = time.perf_counter()
    regions = enumerate_nonempty_regions(inst.polyhedron, dec.vectors, config.delta_feas, config.region_cap)
    region, x0 = regions[0]
    tr = solve_in_region(inst, dec.vectors, region, x0, config)
    wall = time.perf_counter() - t0
    return [BenchRecord(iid, "region-single", inst.n, M, T, wall, tr.value, tr.dinkelbach_rounds,
                        tr.sy_iterations, 1, float("nan"), "global_verified")]


def _run_cell(table: str, n: int, M: int, T: int, family: str, trial: int, seed: int,
              config: SolverConfig) -> list:
    iid = f"{table}-n{n}-M{M}-T{T}-{trial}"
    spec = GeneratorSpec(n, M, T, seed=_seed(seed, n, M, T, trial), family=family, ub=box_bound(n))
    inst = generate(spec)
    if table == "t1":
        return _run_t1(iid, inst, M, T, config)
    if table == "t2":
        exact, w_ex = _timed(solve, inst, replace(config, algorithm="region"))
        ref = exact.f_star
        rows = [_record(iid, "region", inst, M, T, exact, w_ex, ref)]
        for algo in ("ibaraki", "fast-region"):
            out, w = _timed(solve, inst, replace(config, algorithm=algo))
            rows.append(_record(iid, algo, inst, M, T, out, w, ref))
        return rows
    if table in ("t3", "t4"):
        out, w = _timed(solve_fast, inst, config)
        return [_record(iid, "fast-region", inst, M, T, out, w)]
    # t5: the user decomposition gives a single region
    ib, w_ib = _timed(solve, inst, replace(config, algorithm="ibaraki"))
    fast, w_f = _timed(solve, inst, replace(config, algorithm="fast-region", decomp_mode="user"))
    return [
        _record(iid, "ibaraki", inst, M, T, ib, w_ib, ib.f_star),
        _record(iid, "fast-region", inst, M, T, fast, w_f, ib.f_star),
    ]


def _failed(table, n, M, T, trial, algo, exc) -> BenchRecord:
    iid = f"{table}-n{n}-M{M}-T{T}-{trial}"
    return BenchRecord(iid, algo, n, M, T, float("nan"), float("nan"), 0, 0, 0, float("nan"),
                       f"error:{type(exc).__name__}")


def run_bench(
    table: str,
    trials: int = 5,
    scale: str = "desk",
    seed: int = 0,
    config: Optional[SolverConfig] = None,
    cells: Optional[Iterable[tuple]] = None,
    workers: int = 1,
) -> list:
    """Benchmark records for every cell of ``table``; a failing cell is recorded and skipped."""
    if scale not in ("desk", "paper"):
        raise ValueError(f"unknown scale {scale!r}")
    config = config or SolverConfig()
    cells = list(cells) if cells is not None else _cells(table, scale)
    jobs = [(table, n, M, T, fam, trial, seed, config) for (n, M, T, fam) in cells for trial in range(trials)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_run_cell, *job) for job in jobs]
            results = []
            for job, fut in zip(jobs, futures):
                try:
                    results.append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    log.warning("cell %s failed: %s", job[:6], exc)
                    results.append([_failed(*job[:4], job[5], "all", exc)])
    else:
        results = []
        for job in jobs:
            try:
                results.append(_run_cell(*job))
            except Exception as exc:  # noqa: BLE001
                log.warning("cell %s failed: %s", job[:6], exc)
                results.append([_failed(*job[:4], job[5], "all", exc)])
    return [r for rows in results for r in rows]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else format(v, ".10g")
    return str(v)


def to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRecord)])
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()
