"""Benchmark the compiled Haralick kernel against the numpy fallback.

Usage:
    python benchmarks/bench_backends.py [--side 500] [--repeats 5]

Times the windowed Haralick kernel (both backends, several window sizes) and
the full 94-dimensional feature extraction with whichever backend is active.
"""

import argparse
import time

import numpy as np

from pavetex import _kernels_py
from pavetex.backend import backend_name
from pavetex.texture import FeatureParams, extract_fs

try:
    from pavetex import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--side", type=int, default=500)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    patch = rng.integers(0, 256, (args.side, args.side)).astype(np.uint8)
    q16 = ((patch.astype(np.int64) * 16) // 256).astype(np.uint8)

    print(f"active backend: {backend_name()}")
    print(f"patch: {args.side}x{args.side}, median of {args.repeats} runs\n")

    print(f"{'kernel':<28}{'cython':>12}{'python':>12}{'speedup':>10}")
    for window in (5, 11):
        py = timeit(lambda: _kernels_py.haralick_window_maps(q16, 16, window), args.repeats)
        if _kernels is not None:
            cy = timeit(lambda: _kernels.haralick_window_maps(q16, 16, window), args.repeats)
            print(
                f"{'haralick_window_maps w=%d' % window:<28}"
                f"{cy * 1e3:>10.1f}ms{py * 1e3:>10.1f}ms{py / cy:>9.1f}x"
            )
        else:
            print(
                f"{'haralick_window_maps w=%d' % window:<28}"
                f"{'n/a':>12}{py * 1e3:>10.1f}ms{'':>10}"
            )

    full = timeit(lambda: extract_fs(patch, FeatureParams()), args.repeats)
    print(f"\nfull 94-dim extraction ({backend_name()} backend): {full * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
