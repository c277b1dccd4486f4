"""Monte Carlo collision rates of every hash family next to its bound.

    python scripts/probe_bounds.py --trials 20000 --seed 0

For each family, one random near pair and one random far pair are drawn
(see `curvehash.probe.generate_pair`) and probed; the table lists the
estimate, the bound and the verdict.
"""

import argparse

import numpy as np

from curvehash.probe import SCHEME_NAMES, generate_pair, plan_scheme, run_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--d", type=int, default=1)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"{'scheme':<14}{'claim':<6}{'estimate':>10}{'bound':>11}{'half-width':>12}  verdict")
    for name in SCHEME_NAMES:
        d = 1 if name == "continuous" else args.d
        params = plan_scheme(name, 1.0, d, args.m, K=2, w=2, ell=2)
        for claim in ("near", "far"):
            P, Q = generate_pair(params, claim, args.m, rng)
            rep = run_probe(params, P, Q, claim, args.trials, rng)
            print(f"{name:<14}{claim:<6}{rep.estimate:>10.4f}{rep.bound:>11.3g}{rep.half_width:>12.4f}  {rep.verdict}")


if __name__ == "__main__":
    main()
