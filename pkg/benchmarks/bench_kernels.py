"""Time the compiled and numpy KL2/PP2 kernels on one synthetic score block.

    python benchmarks/bench_kernels.py --users 200 --queries 50
"""

import argparse
import time

import numpy as np

from stylomatch.corpus import build_accounts, parse_posts
from stylomatch.kernels import BACKENDS
from stylomatch.similarity import _count_matrix, stream_for
from stylomatch.synth import GeneratorSpec, generate


def build_counts(users, seed, mode):
    posts, _ = generate(GeneratorSpec(seed=seed, user_count=users))
    accounts = build_accounts(parse_posts(posts.splitlines()).posts, min_posts=1)
    counts, _ = _count_matrix([stream_for(a, mode) for a in accounts])
    return counts


def score_block(backend, counts, n_queries):
    ptr = counts.indptr.astype(np.int64)
    idx = counts.indices.astype(np.int64)
    dat = counts.data.astype(np.float64)
    out = []
    for i in range(n_queries):
        lo, hi = ptr[i], ptr[i + 1]
        out.append(backend.kl2_pp2_row(idx[lo:hi], dat[lo:hi], ptr, idx, dat)[0])
    return np.vstack(out)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--users", type=int, default=200)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--mode", default="combined", choices=["linguistic", "temporal", "combined"])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    counts = build_counts(args.users, args.seed, args.mode)
    n_queries = min(args.queries, counts.shape[0])
    print(f"{counts.shape[0]} accounts, {counts.shape[1]} word types, {counts.nnz} nonzeros, "
          f"{n_queries} x {counts.shape[0]} pairs")
    timings, results = {}, {}
    for name, backend in sorted(BACKENDS.items()):
        best = float("inf")
        for _ in range(args.repeat):
            start = time.perf_counter()
            results[name] = score_block(backend, counts, n_queries)
            best = min(best, time.perf_counter() - start)
        timings[name] = best
        print(f"{name:>9}: {best * 1e3:9.1f} ms  ({best / (n_queries * counts.shape[0]) * 1e6:.2f} us/pair)")
    if "compiled" in timings:
        diff = float(np.max(np.abs(results["compiled"] - results["python"])))
        print(f"speedup: {timings['python'] / timings['compiled']:.1f}x, max |diff| = {diff:.1e}")
    return timings


if __name__ == "__main__":
    main()
