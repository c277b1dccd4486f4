"""Command-line interface: ``curvehash {dist,build,query,probe,gen,bench}``.

Exit codes: 0 success, 2 bad input (unknown id, malformed dataset,
dimension mismatch), 3 no valid traversal, 4 index too large, 5 probe
failed, 6 workload generation gave up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .curves import DimensionMismatch, DistanceKind, InfeasibleTraversal, distance
from .dataset import DatasetError, GenerationError, dumps_curve, planted_instance, read_jsonl, write_jsonl
from .index import IndexTooLarge, NNIndex, plan_index
from .probe import SCHEME_NAMES, generate_pair, plan_scheme, run_probe

EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TOO_LARGE, EXIT_PROBE_FAILED, EXIT_GENERATION = 2, 3, 4, 5, 6


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("CURVEHASH_SEED", "0"))


def _load(path):
    try:
        return read_jsonl(path)
    except DatasetError as exc:
        raise CliError(f"{path}: {exc}") from None
    except OSError as exc:
        raise CliError(str(exc)) from None


def _by_id(curves, cid):
    for c in curves:
        if c.id == cid:
            return c
    raise CliError(f"unknown id {cid!r}")


def _kind(name: str, metric: str, w: int | None) -> DistanceKind:
    if name == "continuous1d":
        return DistanceKind("continuous-frechet-1d")
    if name in ("anchored", "speed"):
        if w is None:
            raise CliError(f"--w is required for {name}")
        return DistanceKind.make(metric, name, w)
    return DistanceKind(name)


def cmd_dist(args) -> int:
    curves = _load(args.file)
    P, Q = _by_id(curves, args.id1), _by_id(curves, args.id2)
    try:
        value = distance(P, Q, _kind(args.kind, args.metric, args.w))
    except InfeasibleTraversal:
        raise CliError("no valid traversal", EXIT_INFEASIBLE) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(f"{value:.12g}")
    return 0


def _scheme_args(p: argparse.ArgumentParser):
    p.add_argument("--scheme", choices=SCHEME_NAMES, default="basic")
    p.add_argument("--r", type=float, default=1.0, help="near radius")
    p.add_argument("--m", type=int, help="curve length bound (default: longest curve)")
    p.add_argument("--K", type=int, help="blocks of the trade-off scheme")
    p.add_argument("--w", type=int, help="anchored width or speed")
    p.add_argument("--ell", type=int, help="block length of the constrained schemes")
    p.add_argument("--seed", type=int)


def cmd_build(args) -> int:
    curves = _load(args.file)
    d = curves[0].d if curves else args.d
    m = args.m or max((c.m for c in curves), default=1)
    try:
        params = plan_scheme(args.scheme, args.r, d, m, args.K, args.w, args.ell)
        config = plan_index(params, len(curves), m, seed=_seed(args))
    except IndexTooLarge as exc:
        raise CliError(str(exc), EXIT_TOO_LARGE) from None
    except ValueError as exc:
        raise CliError(str(exc)) from None
    t0 = time.perf_counter()
    index = NNIndex.build(curves, config)
    elapsed = time.perf_counter() - t0
    index.save(args.out)
    print(f"delta={params.delta:.6g} c={params.c:.6g} L={config.L} reps={config.reps} "
          f"n={len(curves)} build_s={elapsed:.3f}")
    return 0


def cmd_query(args) -> int:
    try:
        index = NNIndex.load(args.index)
    except (OSError, ValueError) as exc:
        raise CliError(f"{args.index}: {exc}") from None
    queries = _load(args.queries)
    for ordinal, Q in enumerate(queries):
        try:
            hit = index.query(Q, ordinal)
        except DimensionMismatch as exc:
            raise CliError(f"query {Q.id!r}: {exc}") from None
        print(f"{Q.id}\t{hit if hit is not None else 'none'}")
    return 0


def cmd_probe(args) -> int:
    if args.trials < 100:
        raise CliError("--trials must be at least 100")
    rng = np.random.default_rng(_seed(args))
    if args.data:
        if not args.ids or len(args.ids) != 2:
            raise CliError("--data needs --ids ID1 ID2")
        curves = _load(args.data)
        P, Q = _by_id(curves, args.ids[0]), _by_id(curves, args.ids[1])
        d, m = P.d, args.m or max(P.m, Q.m)
    else:
        d, m = args.d, args.m or 4
    try:
        params = plan_scheme(args.scheme, args.r, d, m, args.K, args.w, args.ell)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if not args.data:
        P, Q = generate_pair(params, args.bound, m, rng)
    report = run_probe(params, P, Q, args.bound, args.trials, rng).to_dict()
    if args.expect is not None:
        report["expected"] = args.expect
        if abs(report["estimate"] - args.expect) > report["half_width"]:
            report["verdict"] = "fail"
    print(json.dumps(report, indent=2))
    return 0 if report["verdict"] == "pass" else EXIT_PROBE_FAILED


def cmd_gen(args) -> int:
    if not args.far_cr > args.planted_r:
        raise CliError("--far-cr must exceed --planted-r")
    rng = np.random.default_rng(_seed(args))
    try:
        inst = planted_instance(args.n, args.m, args.d, args.planted_r, args.far_cr, rng, kind=args.kind)
    except GenerationError as exc:
        raise CliError(str(exc), EXIT_GENERATION) from None
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            write_jsonl(inst.curves, f)
    else:
        write_jsonl(inst.curves, sys.stdout)
    if args.query_out:
        with open(args.query_out, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps_curve(inst.query) + "\n")
    else:
        print(dumps_curve(inst.query), file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    rng = np.random.default_rng(_seed(args))
    d, m = args.d, args.m
    params = plan_scheme(args.scheme, args.r, d, m, args.K, args.w, args.ell)
    t0 = time.perf_counter()
    inst = planted_instance(args.n, m, d, 0.5 * args.r, params.far_radius, rng)
    t1 = time.perf_counter()
    try:
        config = plan_index(params, args.n, m, seed=_seed(args))
    except IndexTooLarge as exc:
        raise CliError(str(exc), EXIT_TOO_LARGE) from None
    index = NNIndex.build(inst.curves, config)
    t2 = time.perf_counter()
    hits = sum(index.query(inst.query, k) == inst.planted_id for k in range(args.queries))
    t3 = time.perf_counter()
    print(json.dumps({
        "scheme": args.scheme, "n": args.n, "m": m, "d": d, "L": config.L, "reps": config.reps,
        "generate_s": round(t1 - t0, 4), "build_s": round(t2 - t1, 4),
        "query_ms": round(1000 * (t3 - t2) / max(args.queries, 1), 4),
        "recall": hits / max(args.queries, 1),
    }, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvehash", description="LSH for polygonal curves")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="exact distance between two curves of a dataset")
    p.add_argument("file")
    p.add_argument("id1")
    p.add_argument("id2")
    p.add_argument("--kind", choices=("frechet", "dtw", "anchored", "speed", "continuous1d"), default="frechet")
    p.add_argument("--metric", choices=("frechet", "dtw"), default="frechet",
                   help="base distance of the anchored and speed kinds")
    p.add_argument("--w", type=int)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("build", help="build an index file from a dataset")
    p.add_argument("file")
    _scheme_args(p)
    p.add_argument("--d", type=int, default=1, help="dimension of an empty dataset")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="query an index with every curve of a file")
    p.add_argument("index")
    p.add_argument("queries")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("probe", help="Monte Carlo check of a collision bound")
    _scheme_args(p)
    p.add_argument("--bound", choices=("near", "far"), default="near")
    p.add_argument("--data", help="dataset holding the pair")
    p.add_argument("--ids", nargs=2, metavar=("ID1", "ID2"))
    p.add_argument("--generate", action="store_true", help="draw a random pair meeting the premise (default)")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--expect", type=float, help="also require |estimate - EXPECT| <= half-width")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("gen", help="planted near-neighbour workload")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--planted-r", type=float, required=True)
    p.add_argument("--far-cr", type=float, required=True)
    p.add_argument("--kind", default="frechet")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--query-out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time generation, build and queries on a planted workload")
    _scheme_args(p)
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(m=8)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--queries", type=int, default=100)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"curvehash: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
