#!/usr/bin/env python3
"""Benchmark the space-varying spectral-sum kernel: compiled vs numpy.

The direct summation is the only hot non-FFT loop in the package, costing
O(n^2 * freq_n^2).  This script times both backends on the same workload and
reports the agreement between their outputs.

    python benchmarks/bench_varying_sum.py [--n 256] [--freq-n 64] [--threads 1]
"""

import argparse
import time

import numpy as np

from orifield import _kernels
from orifield.fields import GAFBF, ScalarField
from orifield.synth import Grid, synthesize_gafbf


def run_once(model, grid, freq_n, threads, repeats=3):
    best = np.inf
    values = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        values = synthesize_gafbf(model, grid, seed=7, freq_n=freq_n, threads=threads).values
        best = min(best, time.perf_counter() - t0)
    return best, values


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--freq-n", type=int, default=64)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    grid = Grid(args.n, 0.0, 1.0)
    model = GAFBF(
        ScalarField.affine(0.1, 0.0, 0.45),
        ScalarField.affine(1.0, 0.0, -np.pi / 2),
        0.3,
    )
    ops = args.n**2 * args.freq_n**2
    print(f"workload: {args.n}^2 pixels x {args.freq_n}^2 bins = {ops:.3g} bin-pixel pairs")

    if not _kernels.HAVE_COMPILED:
        print("compiled kernel not available; timing the numpy backend only")

    results = {}
    saved = _kernels._impl
    try:
        if _kernels.HAVE_COMPILED:
            _kernels._impl = _kernels._varying_cy
            t, v = run_once(model, grid, args.freq_n, args.threads, args.repeats)
            results["cython"] = (t, v)
            print(f"cython ({args.threads} thread(s)): {t:.3f} s  ({ops / t:.3g} pairs/s)")
        _kernels._impl = _kernels._varying_np
        t, v = run_once(model, grid, args.freq_n, args.threads, args.repeats)
        results["numpy"] = (t, v)
        print(f"numpy:               {t:.3f} s  ({ops / t:.3g} pairs/s)")
    finally:
        _kernels._impl = saved

    if len(results) == 2:
        tc, vc = results["cython"]
        tn, vn = results["numpy"]
        diff = np.abs(vc - vn).max() / np.abs(vn).max()
        print(f"speedup: {tn / tc:.2f}x   max relative output difference: {diff:.3g}")


if __name__ == "__main__":
    main()
