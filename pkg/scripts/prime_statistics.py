#!/usr/bin/env python3
"""Tabulate how omega(q - 1) behaves over primes q up to increasing limits.

The planner treats a modulus as typical when omega(q - 1) stays at most
max(3, 2 ln ln q).  This script sieves all primes up to each limit, prints
the average of omega(q - 1) against its predicted ln ln q growth, and counts
how many primes would be flagged atypical at the default threshold.
"""

import argparse
import math

import numpy as np

from affext.numtheory import prachar_average, primes_up_to, typicality_threshold


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--limit",
        action="append",
        dest="limits",
        type=int,
        help="repeatable; defaults to 10**3..10**6",
    )
    args = parser.parse_args()
    limits = args.limits or [10**3, 10**4, 10**5, 10**6]

    header = (
        f"{'limit':>9} {'primes':>8} {'sum omega':>10} {'mean':>7} "
        f"{'lnln(limit)':>11} {'normalized':>11} {'atypical':>9}"
    )
    print(header)
    print("-" * len(header))
    for limit in limits:
        total, norm = prachar_average(limit)
        primes = primes_up_to(limit)
        omega = np.zeros(limit, dtype=np.uint8)
        for p in primes:
            omega[int(p) :: int(p)] += 1
        counts = omega[primes - 1]
        atypical = sum(
            1
            for p, w in zip(primes.tolist(), counts.tolist())
            if w > typicality_threshold(int(p))
        )
        print(
            f"{limit:>9} {primes.size:>8} {total:>10} "
            f"{total / primes.size:>7.3f} {math.log(math.log(limit)):>11.3f} "
            f"{norm:>11.4f} {atypical:>9}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
