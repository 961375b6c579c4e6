#!/usr/bin/env python3
"""Benchmark the compiled split kernel against the NumPy fallback.

Times best-split search at three node shapes (forest root, rotation-forest
root, deep small node) and one full rotation-forest fit, and verifies that
both kernels return identical splits on every timed case.

Run from the repo root:  python benchmarks/bench_split.py
"""

import time

import numpy as np

from probesel.classifiers import _split_fast, _split_py  # noqa: F401
from probesel.classifiers import fit_rotation_forest
from probesel.classifiers import _kernel


def time_kernel(fn, x, y, n_classes, feats, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(x, y, n_classes, feats)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_splits():
    rng = np.random.default_rng(0)
    shapes = (
        ("rf root (480x26, sqrt-p feats)", 480, 26, 5, 300),
        ("rotation root (480x560, all feats)", 480, 560, 560, 5),
        ("deep node (24x560, all feats)", 24, 560, 560, 100),
    )
    print(f"{'case':<38} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, n, p, k, reps in shapes:
        x = np.ascontiguousarray(rng.standard_normal((n, p)))
        y = rng.integers(0, 3, n).astype(np.int64)
        feats = np.sort(rng.choice(p, k, replace=False)).astype(np.int64)
        t_py, r_py = time_kernel(_split_py.best_split, x, y, 3, feats, reps)
        t_fast, r_fast = time_kernel(_split_fast.best_split, x, y, 3, feats, reps)
        assert r_py == r_fast, f"kernel mismatch on {name}: {r_py} vs {r_fast}"
        print(f"{name:<38} {t_py * 1e3:>8.3f}ms {t_fast * 1e3:>8.3f}ms {t_py / t_fast:>7.1f}x")


def bench_forest():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((480, 560)) * np.exp(rng.uniform(0, 8, 560))
    y = rng.choice(["a", "b", "c"], 480)
    results = {}
    for label, pure in (("numpy", True), ("compiled", False)):
        import importlib
        import os

        if pure:
            os.environ["PROBESEL_PURE_PYTHON"] = "1"
        else:
            os.environ.pop("PROBESEL_PURE_PYTHON", None)
        importlib.reload(_kernel)  # tree.py reads best_split through this module
        t0 = time.perf_counter()
        fit_rotation_forest(x, y, n_trees=4, seed=0)
        results[label] = time.perf_counter() - t0
    print(
        f"\nrotation forest fit (480x560, 4 trees): numpy {results['numpy']:.2f}s, "
        f"compiled {results['compiled']:.2f}s, speedup {results['numpy'] / results['compiled']:.1f}x"
    )


if __name__ == "__main__":
    print(f"selected kernel at import: {'compiled' if _kernel.COMPILED else 'numpy'}")
    bench_splits()
    bench_forest()
