"""Benchmark the compiled interpolation kernels against the numpy fallback.

Runs each kernel on a bulk workload (long polylines, dense query grids)
and on a many-small-calls workload shaped like the per-sample usage in the
evaluation pipeline, then prints median wall times and speedups.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import statistics
import time

import numpy as np

from podreliab._kernels import available_backends, get_backend


def _make_case(rng, n_points, n_queries):
    t = np.cumsum(rng.uniform(1.0, 5.0, size=n_points))
    px = np.cumsum(rng.normal(0.0, 8.0, size=n_points))
    py = np.cumsum(rng.normal(0.0, 8.0, size=n_points))
    tq = np.sort(rng.uniform(t[0], t[-1], size=n_queries))
    return t, px, py, tq


def _time(func, repeats):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def run(repeats=7, seed=1234):
    rng = np.random.default_rng(seed)
    backends = {name: get_backend(name) for name in available_backends()}

    bulk = _make_case(rng, 20_000, 200_000)
    small_cases = [_make_case(rng, 11, 100) for _ in range(2_000)]
    flip_vals = rng.normal(0.0, 1.0, size=100_000)
    flip_vals[rng.random(100_000) < 0.05] = 0.0

    workloads = {
        "interp bulk (20k pts, 200k queries)": lambda b: b.interp_polyline(
            bulk[0], bulk[1], bulk[2], bulk[3]),
        "gap bulk (20k pts, 200k queries)": lambda b: b.gap_at_times(
            bulk[0], bulk[1], bulk[2], bulk[1][::-1].copy(),
            bulk[2][::-1].copy(), bulk[3]),
        "interp small x2000 (11 pts, 100 queries)": lambda b: [
            b.interp_polyline(t, px, py, tq)
            for t, px, py, tq in small_cases],
        "first_sign_flip (100k values)": lambda b: b.first_sign_flip(
            flip_vals),
    }

    print(f"backends: {', '.join(backends)}")
    print(f"repeats per measurement: {repeats} (median reported)\n")
    header = f"{'workload':<44}" + "".join(
        f"{name:>12}" for name in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, work in workloads.items():
        times = {}
        for name, mod in backends.items():
            times[name] = _time(lambda m=mod: work(m), repeats)
        row = f"{label:<44}" + "".join(
            f"{times[name] * 1e3:>10.2f}ms" for name in backends)
        if "pure" in times and "cython" in times and times["cython"] > 0:
            row += f"{times['pure'] / times['cython']:>9.1f}x"
        print(row)

    # Cross-check: both backends must agree bit for bit.
    if len(backends) > 1:
        ref = None
        for name, mod in backends.items():
            qx, qy = mod.interp_polyline(*bulk)
            gaps = mod.gap_at_times(bulk[0], bulk[1], bulk[2],
                                    bulk[1][::-1].copy(),
                                    bulk[2][::-1].copy(), bulk[3])
            if ref is None:
                ref = (qx, qy, gaps)
            else:
                assert np.array_equal(ref[0], qx)
                assert np.array_equal(ref[1], qy)
                assert np.array_equal(ref[2], gaps)
        print("\nbackend agreement: exact (bit-for-bit)")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()
    run(repeats=args.repeats, seed=args.seed)
