"""Timing harness comparing the numba and numpy kernel paths."""

import time

import numpy as np

from kvisits._accel import HAVE_NUMBA, backend_name
from kvisits.kernels import (
    MODULUS,
    det_batch_numba,
    det_batch_numpy,
    gap_grid_min_numba,
    gap_grid_min_numpy,
)


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def det_case(n: int, density: float, points: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, True)
    rows, cols = np.nonzero(mask)
    weights = rng.integers(0, 4, size=rows.size)
    coefs = rng.integers(1, MODULUS, size=rows.size, dtype=np.uint64)
    pts = rng.integers(1, MODULUS, size=points, dtype=np.uint64)
    return n, rows, cols, weights, coefs, pts


def run_benchmarks(repeat: int = 3, quick: bool = False) -> dict:
    """Best-of-``repeat`` wall times per kernel and backend; outputs are cross-checked."""
    det_sizes = [(7, 64)] if quick else [(7, 450), (16, 1024), (32, 1024)]
    gap_xmax = 500.0 if quick else 1e4
    report = {"default_backend": backend_name(), "numba_available": HAVE_NUMBA, "det_batch": [], "gap_grid": {}}
    for n, pts in det_sizes:
        case = det_case(n, 0.5, pts)
        row = {"n": n, "points": pts}
        t_np, ref = _best_of(lambda: det_batch_numpy(*case), repeat)
        row["numpy_s"] = t_np
        if HAVE_NUMBA:
            det_batch_numba(*case)  # compile outside the timing
            t_nb, got = _best_of(lambda: det_batch_numba(*case), repeat)
            row["numba_s"] = t_nb
            row["speedup"] = t_np / t_nb if t_nb else None
            row["agree"] = bool(np.array_equal(ref, got))
        report["det_batch"].append(row)
    t_np, ref = _best_of(lambda: gap_grid_min_numpy(gap_xmax, 0.5), repeat)
    g = {"x_max": gap_xmax, "step": 0.5, "numpy_s": t_np, "min": ref[0]}
    if HAVE_NUMBA:
        gap_grid_min_numba(10.0, 0.5)
        t_nb, got = _best_of(lambda: gap_grid_min_numba(gap_xmax, 0.5), repeat)
        g.update(numba_s=t_nb, speedup=t_np / t_nb if t_nb else None, agree=abs(float(got[0]) - ref[0]) < 1e-12)
    report["gap_grid"] = g
    return report
