"""Command-line entry point: generate, solve, bench, verify."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .bench import TABLES, run_bench, to_csv
from .decomposition import eigen_decompose
from .errors import LrqfpError
from .generator import GeneratorSpec, generate
from .model import SolverConfig, Status, read_instance, write_instance
from .oracle import grid_oracle
from .region_solver import solve

ALGOS = ("ibaraki", "region", "fast-region", "rank-one", "auto")
DECOMPS = {"eig": "eigen", "ldl": "ldl", "user": "user"}
FAMILIES = {"standard": "standard", "full-rank-tn": "full_rank_tn"}


def _write(out, data: str | bytes) -> None:
    if out is None:
        sys.stdout.write(data.decode() if isinstance(data, bytes) else data)
        if not (data.endswith(b"\n") if isinstance(data, bytes) else data.endswith("\n")):
            sys.stdout.write("\n")
        return
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(out, mode) as fh:
        fh.write(data)


def _load(path: str):
    return read_instance(Path(path).read_bytes())


def cmd_generate(args) -> int:
    spec = GeneratorSpec(args.n, args.rank, args.t, seed=args.seed, family=FAMILIES[args.family], ub=args.ub)
    _write(args.out, write_instance(generate(spec)))
    return 0


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    config = SolverConfig(eps=args.eps, algorithm=args.algo, decomp_mode=DECOMPS[args.decomp])
    outcome = solve(inst, config)
    _write(args.out, json.dumps(outcome.to_dict(), indent=2))
    return 0


def cmd_bench(args) -> int:
    records = run_bench(args.table, trials=args.trials, scale=args.scale, seed=args.seed, workers=args.workers)
    _write(args.out, to_csv(records))
    return 0


def cmd_verify(args) -> int:
    """Compare every applicable algorithm against the sampling oracle; exit 1 on a disagreement."""
    inst = _load(args.instance)
    ref = grid_oracle(inst, samples=args.oracle_samples)
    if ref.flag:
        print(f"oracle: {ref.flag}")
    else:
        print(f"oracle: f = {ref.f_best:.10g}")
    algos = ["ibaraki", "region", "fast-region"]
    if _rank(inst) == 1:
        algos.append("rank-one")
    bad = False
    base = SolverConfig()
    for algo in algos:
        out = solve(inst, replace(base, algorithm=algo))
        if out.status is Status.INFEASIBLE:
            print(f"{algo:12s} infeasible")
            bad |= not ref.flag
            continue
        rel = (ref.f_best - out.f_star) / abs(ref.f_best) if not ref.flag else float("nan")
        verdict = "ok"
        if out.status is Status.GLOBAL_VERIFIED and rel > 1e-2:
            verdict, bad = "BELOW ORACLE", True
        print(f"{algo:12s} f = {out.f_star:.10g}  status = {out.status.value:16s} rel = {rel:+.2e}  {verdict}")
    return 1 if bad else 0


def _rank(inst) -> int:
    try:
        return eigen_decompose(inst.Q, SolverConfig().rank_tol).rank
    except LrqfpError:
        return -1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lrqfp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--family", choices=list(FAMILIES), default="standard")
    g.add_argument("--ub", type=float, default=0.1)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("--algo", choices=ALGOS, default="auto")
    s.add_argument("--decomp", choices=list(DECOMPS), default="eig")
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--out")
    s.add_argument("instance")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark table to CSV")
    b.add_argument("--table", choices=TABLES, required=True)
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--scale", choices=("desk", "paper"), default="desk")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check all algorithms against the sampling oracle")
    v.add_argument("--oracle-samples", type=int, default=200_000)
    v.add_argument("instance")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (LrqfpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
