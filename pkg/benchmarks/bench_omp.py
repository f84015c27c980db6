#!/usr/bin/env python3
"""Compare the compiled OMP kernel against the pure-numpy fallback.

Times repeated recoveries at a few problem sizes and prints per-call wall
time plus the speedup. Run after an editable install:

    python benchmarks/bench_omp.py [--repeats 2000]
"""

import argparse
import time

import nwomp as nw
from nwomp.omp import available_backends

CASES = (
    # (N, M, k) -- the stock experiment size first
    (32, 20, 2),
    (128, 64, 6),
    (512, 128, 10),
)


def make_problem(n, m, k, seed):
    a = nw.build_cs_matrix(nw.zadoff_chu(n), m, shift_seed=(seed, 0))
    ys = []
    for t in range(64):
        x = nw.sample_sparse_signal(n, k, (seed, 1, t))
        ys.append(nw.measure(a, x, 0.05, (seed, 2, t)).observations)
    return a, ys


def time_backend(backend, a, ys, k, repeats):
    nw.omp_recover(a, ys[0], k, backend=backend)  # warm up
    start = time.perf_counter()
    for i in range(repeats):
        nw.omp_recover(a, ys[i % len(ys)], k, backend=backend)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    backends = available_backends()
    print("backends built: %s" % (backends,))
    header = "%-14s" % "N x M (k)" + "".join("%14s" % b for b in backends)
    if len(backends) > 1:
        header += "%12s" % "speedup"
    print(header)
    for n, m, k in CASES:
        a, ys = make_problem(n, m, k, seed=99)
        repeats = max(args.repeats // max(1, n // 32), 50)
        per_call = {b: time_backend(b, a, ys, k, repeats) for b in backends}
        row = "%-14s" % ("%dx%d (%d)" % (n, m, k))
        row += "".join("%11.1f us" % (per_call[b] * 1e6) for b in backends)
        if "cython" in per_call and "python" in per_call:
            row += "%11.1fx" % (per_call["python"] / per_call["cython"])
        print(row)


if __name__ == "__main__":
    main()
