"""Planted near-neighbour benchmark over many seeds.

    python scripts/planted_benchmark.py --runs 100 --n 1000 --m 8 --d 2

Each run plants one curve within r of a random query among n - 1 curves
farther than c*r, builds an index with the chosen family and queries it
once.  Prints recall, soundness of the answers and timings as JSON.
"""

import argparse
import json
import time

import numpy as np

from curvehash import distance
from curvehash.dataset import planted_instance
from curvehash.index import NNIndex, make_scheme, plan_index
from curvehash.probe import SCHEME_NAMES, plan_scheme, premise_kind


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scheme", choices=SCHEME_NAMES, default="basic")
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--r", type=float, default=1.0)
    ap.add_argument("--K", type=int, default=2)
    ap.add_argument("--w", type=int)
    ap.add_argument("--ell", type=int)
    args = ap.parse_args()

    params = plan_scheme(args.scheme, args.r, args.d, args.m, args.K, args.w, args.ell)
    kind = premise_kind(params)
    verify = make_scheme(params).verify_kind()
    found = unsound = 0
    build_s = query_s = gen_s = 0.0
    for seed in range(args.runs):
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        inst = planted_instance(args.n, args.m, args.d, args.r, params.far_radius, rng, kind=kind)
        t1 = time.perf_counter()
        index = NNIndex.build(inst.curves, plan_index(params, args.n, args.m, seed=seed))
        t2 = time.perf_counter()
        hit = index.query(inst.query)
        query_s += time.perf_counter() - t2
        gen_s, build_s = gen_s + t1 - t0, build_s + t2 - t1
        if hit is None:
            continue
        found += hit == inst.planted_id
        match = next(c for c in inst.curves if c.id == hit)
        unsound += distance(inst.query, match, verify) > params.far_radius
    print(json.dumps({
        "scheme": args.scheme, "runs": args.runs, "n": args.n, "m": args.m, "d": args.d,
        "delta": params.delta, "c": params.c, "recall": found / args.runs, "unsound_answers": unsound,
        "mean_generate_s": gen_s / args.runs, "mean_build_s": build_s / args.runs,
        "mean_query_ms": 1000 * query_s / args.runs,
    }, indent=2))


if __name__ == "__main__":
    main()
