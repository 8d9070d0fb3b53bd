"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from mopadgan import kernels


def cases(rng):
    t = np.sort(rng.random(50))[::-1].copy()
    front = np.ascontiguousarray(np.column_stack([t, 1.0 - t ** 2 + 0.01]))
    ys = rng.random((128_000, 2))  # 1000 candidates x 128 Monte-Carlo draws
    pts = rng.random((400, 2))
    a, b = rng.random((1000, 2)), rng.random((10_000, 2))
    return {
        "hv2d_sorted (50 pts)": ("hv2d_sorted", (front, 0.0, 0.0)),
        "hvi2d (50-pt front, 128k draws)": ("hvi2d", (front, ys, 0.0, 0.0)),
        "nondominated_mask (400 pts)": ("nondominated_mask", (pts,)),
        "min_sqdist (1k x 10k)": ("min_sqdist", (a, b)),
    }


def best_time(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.2:
        number *= 2
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'numpy':>11s} {'cython':>11s} {'speedup':>8s}")
    for label, (name, fargs) in cases(rng).items():
        t_py = best_time(getattr(kernels.python_backend, name), fargs, args.repeat)
        if kernels.compiled_backend is None:
            print(f"{label:36s} {t_py * 1e3:9.3f}ms {'-':>11s} {'-':>8s}")
            continue
        t_cy = best_time(getattr(kernels.compiled_backend, name), fargs, args.repeat)
        print(f"{label:36s} {t_py * 1e3:9.3f}ms {t_cy * 1e3:9.3f}ms {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
