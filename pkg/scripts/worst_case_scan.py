#!/usr/bin/env python3
"""Scan subspace dimensions for the worst-case output bias of one instance.

For each k from 1 to n this runs an exhaustive sweep (or a seeded sample when
the exhaustive count exceeds the cap), recording the largest statistical
distance and the largest nontrivial character magnitude together with the
subspace ids attaining them.  The table makes the dimension dependence of the
bias visible: restrictions to larger subspaces are measurably flatter.
"""

import argparse
import time

from affext.analysis import (
    ExhaustiveSubspaces,
    SampledSubspaces,
    verify_extractor,
)
from affext.extractor import build_spec
from affext.subspace import count_affine_subspaces


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=int, default=13)
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument(
        "--exhaustive-cap",
        type=int,
        default=200_000,
        help="fall back to sampling above this many subspaces",
    )
    parser.add_argument("--sample", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"q={args.q} n={args.n} m={args.m}")
    header = f"{'k':>2} {'source':>18} {'subspaces':>10} {'max_sd':>12} {'@id':>9} {'max_char':>12} {'@id':>9} {'secs':>7}"
    print(header)
    print("-" * len(header))
    for k in range(max(args.m, 1), args.n + 1):
        spec = build_spec(args.q, args.n, k, args.m)
        total = count_affine_subspaces(args.n, k, args.q)
        if total <= args.exhaustive_cap:
            source = ExhaustiveSubspaces()
        else:
            source = SampledSubspaces(count=args.sample, seed=args.seed)
        t0 = time.perf_counter()
        result = verify_extractor(
            spec,
            source,
            checks=("sd", "char_max", "xor"),
            workers=args.workers,
            collect="violations",
        )
        secs = time.perf_counter() - t0
        if not result.ok:
            print(f"k={k}: BOUND VIOLATIONS: {result.violations}")
            return 1
        print(
            f"{k:>2} {result.source:>18} {result.processed:>10}"
            f" {result.max_sd:>12.6f} {result.max_sd_subspace:>9}"
            f" {result.max_char:>12.6f} {result.max_char_subspace:>9}"
            f" {secs:>7.2f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
