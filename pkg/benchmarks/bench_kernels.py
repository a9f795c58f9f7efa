"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py [--frames 40] [--repeat 5]

Covers the three hot paths: per-pixel modal code (background learning),
4-connected component labeling (foreground extraction), and the object
motion loop (engine stepping / relay trials).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dcglab.kernels import get_backend


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_inputs(frames: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    h, w = 130, 360
    stack = rng.integers(0, 8, size=(frames, h, w)).astype(np.uint8)
    mask = rng.random((h, w)) < 0.35
    n = 6
    px = np.arange(n, dtype=np.int32) * 40 + 10
    py = np.arange(n, dtype=np.int32) * 12 + 8
    dirs = (np.arange(n) % 8).astype(np.uint8)
    sizes = np.full(n, 18, dtype=np.int32)
    ones = np.ones(n, dtype=np.uint8)
    return stack, mask, (px, py, dirs, sizes, sizes.copy(), ones, ones.copy())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--motion-frames", type=int, default=100_000)
    args = ap.parse_args()

    results = {}
    for name in ("numba", "numpy"):
        try:
            impl = get_backend(name)
        except ImportError:
            print(f"{name}: unavailable, skipped")
            continue
        stack, mask, motion = make_inputs(args.frames)
        impl.mode_codes(stack[:2])           # warm up JIT
        impl.label_components(mask)
        a = tuple(x.copy() for x in motion)
        impl.advance_objects(*a, 0, 0, 360, 130, 100, 1)

        rows = {}
        rows["mode_codes"] = _time(lambda: impl.mode_codes(stack), args.repeat)
        rows["label_components"] = _time(lambda: impl.label_components(mask),
                                         args.repeat)

        def motion_run():
            b = tuple(x.copy() for x in motion)
            impl.advance_objects(*b, 0, 0, 360, 130, args.motion_frames, 1)

        rows["advance_objects"] = _time(motion_run, args.repeat)
        results[name] = rows

    kernels = ["mode_codes", "label_components", "advance_objects"]
    print(f"\n{'kernel':<20} " + " ".join(f"{n:>12}" for n in results) +
          ("      speedup" if len(results) == 2 else ""))
    for k in kernels:
        line = f"{k:<20} "
        line += " ".join(f"{results[n][k] * 1e3:>10.2f}ms" for n in results)
        if len(results) == 2:
            a, b = (results[n][k] for n in results)
            line += f"   {max(a, b) / min(a, b):>8.1f}x"
        print(line)
    print(f"\nmode over {args.frames} frames of 360x130; motion loop of "
          f"{args.motion_frames} frames x 6 objects")


if __name__ == "__main__":
    main()
