#!/usr/bin/env python3
"""Benchmark the three batch-evaluation kernels against each other.

Runs the same workload through the fused Montgomery kernel (numba), the
vectorised square-and-multiply path (numpy), and the scalar path (python),
confirms the outputs are identical, and prints throughput per kernel.  The
scalar path is capped at a smaller batch so the run stays short.
"""

import argparse
import time

import numpy as np

from affext.batch import pick_impl
from affext.extractor import build_spec, evaluate_batch


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=int, default=2**31 - 1)
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--m", type=int, default=2)
    parser.add_argument("--batch", type=int, default=10**6)
    parser.add_argument("--python-cap", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    spec = build_spec(args.q, args.n, args.n, args.m)
    rng = np.random.default_rng(args.seed)
    xs = rng.integers(0, args.q, size=(args.batch, args.n), dtype=np.int64)
    print(
        f"q={args.q} n={args.n} m={args.m} batch={args.batch} "
        f"(auto kernel: {pick_impl(args.q, 'auto')})"
    )

    outputs = {}
    for impl in ("numba", "numpy", "python"):
        try:
            pick_impl(args.q, impl)
        except ValueError as exc:
            print(f"{impl:>7}: skipped ({exc})")
            continue
        rows = xs if impl != "python" else xs[: args.python_cap]
        evaluate_batch(spec, rows[:64], impl=impl)  # warm up / jit compile
        t0 = time.perf_counter()
        out = evaluate_batch(spec, rows, impl=impl)
        secs = time.perf_counter() - t0
        outputs[impl] = out
        rate = rows.shape[0] / secs
        print(f"{impl:>7}: {secs:8.3f} s  {rate:12.0f} vectors/s")

    impls = list(outputs)
    for other in impls[1:]:
        a, b = outputs[impls[0]], outputs[other]
        rows = min(a.shape[0], b.shape[0])
        if not np.array_equal(a[:rows], b[:rows]):
            print(f"MISMATCH between {impls[0]} and {other}")
            return 1
    print("all kernels agree on the overlapping rows")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
