"""Compare the compiled kernels against the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--loans 20000] [--repeats 200]

Builds a realistic single-window transition matrix from synthetic
records, then times matrix-vector products and DTW distances under both
backends.  The compiled extension must be built for the comparison;
otherwise only the fallback is reported.
"""

import argparse
import time

import numpy as np

from riskrank import ingest, netmodel, spmat
from riskrank._kernels import _fallback

try:
    from riskrank._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_matvec(args):
    cfg = ingest.SynthConfig(
        n_loans=args.loans, n_products=8, n_districts=12, span_months=60,
        base_default_rate=0.1, seed=0,
    )
    records = ingest.generate_synthetic(cfg)
    net = netmodel.build_network(records)
    matrix = netmodel.supra_adjacency(net)
    normalized = spmat.column_normalize(
        matrix, spmat.DanglingPolicy.UNIFORM_RESTART
    ).matrix
    x = np.random.default_rng(1).random(normalized.n_cols)

    rows = []
    fall = timeit(
        lambda: _fallback.csc_matvec(
            normalized.n_rows, normalized.indptr, normalized.indices,
            normalized.data, x,
        ),
        args.repeats,
    )
    rows.append(("python", fall))
    if _core is not None:
        comp = timeit(
            lambda: _core.csc_matvec(
                normalized.n_rows, normalized.indptr, normalized.indices,
                normalized.data, x,
            ),
            args.repeats,
        )
        rows.append(("compiled", comp))
    print(f"csc_matvec  ({normalized.n_rows} rows, {normalized.nnz} nnz)")
    report(rows)


def bench_dtw(args):
    rng = np.random.default_rng(2)
    a = rng.random(args.series_len)
    b = rng.random(args.series_len)

    rows = [("python", timeit(lambda: _fallback.dtw_cost(a, b), args.repeats))]
    if _core is not None:
        rows.append(("compiled", timeit(lambda: _core.dtw_cost(a, b), args.repeats)))
    print(f"dtw_cost    (two series of length {args.series_len})")
    report(rows)


def report(rows):
    base = rows[0][1]
    for name, best in rows:
        speedup = f"{base / best:5.1f}x" if best > 0 else "  n/a"
        print(f"  {name:<9} {best * 1e6:10.1f} us   {speedup}")
    print()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--loans", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--series-len", type=int, default=500)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend not available; timing the fallback only\n")
    bench_matvec(args)
    bench_dtw(args)


if __name__ == "__main__":
    main()
