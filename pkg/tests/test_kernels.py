import os
import random
import subprocess
import sys

import numpy as np
import pytest

from kvisits._accel import HAVE_NUMBA
from kvisits.kernels import (
    MODULUS,
    det_batch,
    det_batch_numba,
    det_batch_numpy,
    gap_grid_min,
    gap_grid_min_numba,
    gap_grid_min_numpy,
)

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def det_reference(n, rows, cols, weights, coefs, y):
    """Python big-int Gaussian elimination mod p."""
    m = [[0] * n for _ in range(n)]
    for r, c, w, a in zip(rows, cols, weights, coefs):
        m[r][c] = (m[r][c] + a * pow(y, w, MODULUS)) % MODULUS
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c] % MODULUS
        inv = pow(m[c][c], MODULUS - 2, MODULUS)
        for r in range(c + 1, n):
            f = m[r][c] * inv % MODULUS
            m[r] = [(x - f * y2) % MODULUS for x, y2 in zip(m[r], m[c])]
    return det % MODULUS


def random_system(rng, n):
    e = rng.randint(0, 3 * n)
    rows = [rng.randrange(n) for _ in range(e)]
    cols = [rng.randrange(n) for _ in range(e)]
    weights = [rng.randint(0, 9) for _ in range(e)]
    coefs = [rng.randrange(1, MODULUS) for _ in range(e)]
    points = [rng.randrange(MODULUS) for _ in range(7)] + [0, 1, MODULUS - 1]
    return rows, cols, weights, coefs, points


@pytest.mark.parametrize("seed", range(25))
def test_numpy_det_matches_reference(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    rows, cols, weights, coefs, points = random_system(rng, n)
    got = det_batch_numpy(n, rows, cols, weights, coefs, points)
    assert [int(v) for v in got] == [det_reference(n, rows, cols, weights, coefs, y) for y in points]


@needs_numba
@pytest.mark.parametrize("seed", range(25))
def test_numba_det_matches_numpy(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(1, 8)
    args = random_system(rng, n)
    assert np.array_equal(det_batch_numba(n, *args), det_batch_numpy(n, *args))


def test_dispatch_and_empty_matrix():
    assert [int(v) for v in det_batch(0, [], [], [], [], [3, 5])] == [1, 1]
    ident = det_batch(2, [0, 1], [0, 1], [0, 0], [1, 1], [7])
    assert int(ident[0]) == 1


def test_singular():
    assert int(det_batch(2, [0, 0], [0, 1], [0, 0], [1, 1], [2])[0]) == 0


def test_gap_grid_numpy():
    v, x, y = gap_grid_min_numpy(200.0, 0.5)
    assert x >= 2 * y - 1 and y >= 1
    assert abs(v - (y / x + x / (x + 2 * y - 1))) < 1e-12


@needs_numba
def test_gap_grid_parity():
    a = gap_grid_min_numba(500.0, 0.5)
    b = gap_grid_min_numpy(500.0, 0.5)
    assert a[1:] == b[1:] and abs(a[0] - b[0]) < 1e-12
    assert gap_grid_min(500.0, 0.5)[1:] == b[1:]


def test_env_flag_selects_numpy():
    env = dict(os.environ, KVISITS_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from kvisits._accel import backend_name; print(backend_name())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "numpy"
