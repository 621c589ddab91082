"""Hot numeric kernels, each with a numba path and a pure-numpy path.

Two kernels live here:

* ``det_batch`` evaluates the determinant of a sparse polynomial matrix at many
  field points modulo the Mersenne prime 2**61 - 1.  This dominates the
  randomized matching pipeline.
* ``gap_grid_min`` scans the two-level density function over a dense grid.

The public entry points dispatch on :data:`kvisits._accel.USE_NUMBA`; the
``*_numba`` / ``*_numpy`` variants stay importable so benchmarks and tests can
compare both in one process.
"""

import numpy as np

from kvisits._accel import HAVE_NUMBA, USE_NUMBA, njit

MODULUS = (1 << 61) - 1

_P = np.uint64(MODULUS)
_ZERO = np.uint64(0)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_MASK30 = np.uint64((1 << 30) - 1)
_MASK31 = np.uint64((1 << 31) - 1)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S61 = np.uint64(61)


# ---------------------------------------------------------------------------
# modular arithmetic on uint64, p = 2**61 - 1
#
# a*b is split into 31/30-bit limbs so every partial product fits in 64 bits;
# 2**61 == 1 (mod p) folds the high part back.


@njit(cache=True)
def _mulmod(a, b):
    ah = a >> _S31
    al = a & _MASK31
    bh = b >> _S31
    bl = b & _MASK31
    mid = ah * bl + al * bh
    s = _TWO * ah * bh + (mid >> _S30) + ((mid & _MASK30) << _S31) + al * bl
    s = (s & _P) + (s >> _S61)
    s = (s & _P) + (s >> _S61)
    if s >= _P:
        s -= _P
    return s


@njit(cache=True)
def _addmod(a, b):
    s = a + b
    if s >= _P:
        s -= _P
    return s


@njit(cache=True)
def _submod(a, b):
    if a >= b:
        return a - b
    return a + _P - b


@njit(cache=True)
def _powmod(a, e):
    result = _ONE
    base = a
    while e > 0:
        if e & 1:
            result = _mulmod(result, base)
        base = _mulmod(base, base)
        e >>= 1
    return result


@njit(cache=True)
def _det_inplace(m, n):
    det = _ONE
    for c in range(n):
        piv = -1
        for r in range(c, n):
            if m[r, c] != _ZERO:
                piv = r
                break
        if piv < 0:
            return _ZERO
        if piv != c:
            for j in range(c, n):
                tmp = m[c, j]
                m[c, j] = m[piv, j]
                m[piv, j] = tmp
            det = _submod(_ZERO, det)
        pv = m[c, c]
        det = _mulmod(det, pv)
        inv = _powmod(pv, MODULUS - 2)
        for r in range(c + 1, n):
            if m[r, c] == _ZERO:
                continue
            f = _mulmod(m[r, c], inv)
            for j in range(c, n):
                m[r, j] = _submod(m[r, j], _mulmod(f, m[c, j]))
    return det


@njit(cache=True)
def _det_batch_numba_impl(n, rows, cols, weights, coefs, points, max_weight):
    npts = points.shape[0]
    out = np.empty(npts, dtype=np.uint64)
    m = np.zeros((n, n), dtype=np.uint64)
    pw = np.empty(max_weight + 1, dtype=np.uint64)
    for q in range(npts):
        y = points[q]
        pw[0] = _ONE
        for w in range(1, max_weight + 1):
            pw[w] = _mulmod(pw[w - 1], y)
        for i in range(n):
            for j in range(n):
                m[i, j] = _ZERO
        for e in range(rows.shape[0]):
            r = rows[e]
            c = cols[e]
            m[r, c] = _addmod(m[r, c], _mulmod(coefs[e], pw[weights[e]]))
        out[q] = _det_inplace(m, n)
    return out


def det_batch_numba(n, rows, cols, weights, coefs, points):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    rows, cols, weights, coefs, points = _prepare(rows, cols, weights, coefs, points)
    max_weight = int(weights.max()) if weights.size else 0
    return _det_batch_numba_impl(n, rows, cols, weights, coefs, points, max_weight)


# ---------------------------------------------------------------------------
# numpy path: vectorised over evaluation points


def _mulmod_vec(a, b):
    ah = a >> _S31
    al = a & _MASK31
    bh = b >> _S31
    bl = b & _MASK31
    mid = ah * bl + al * bh
    s = _TWO * ah * bh + (mid >> _S30) + ((mid & _MASK30) << _S31) + al * bl
    s = (s & _P) + (s >> _S61)
    s = (s & _P) + (s >> _S61)
    return np.where(s >= _P, s - _P, s)


def _addmod_vec(a, b):
    s = a + b
    return np.where(s >= _P, s - _P, s)


def _submod_vec(a, b):
    return np.where(a >= b, a - b, a + (_P - b))


def _powmod_vec(a, e):
    result = np.ones_like(a)
    base = a.copy()
    while e > 0:
        if e & 1:
            result = _mulmod_vec(result, base)
        base = _mulmod_vec(base, base)
        e >>= 1
    return result


def det_batch_numpy(n, rows, cols, weights, coefs, points):
    rows, cols, weights, coefs, points = _prepare(rows, cols, weights, coefs, points)
    npts = points.shape[0]
    if n == 0:
        return np.ones(npts, dtype=np.uint64)
    max_weight = int(weights.max()) if weights.size else 0
    pw = np.empty((max_weight + 1, npts), dtype=np.uint64)
    pw[0] = _ONE
    for w in range(1, max_weight + 1):
        pw[w] = _mulmod_vec(pw[w - 1], points)

    m = np.zeros((npts, n, n), dtype=np.uint64)
    for e in range(rows.shape[0]):
        r, c = rows[e], cols[e]
        m[:, r, c] = _addmod_vec(m[:, r, c], _mulmod_vec(coefs[e], pw[weights[e]]))

    idx = np.arange(npts)
    det = np.ones(npts, dtype=np.uint64)
    scale = np.ones(npts, dtype=np.uint64)
    negate = np.zeros(npts, dtype=bool)
    dead = np.zeros(npts, dtype=bool)
    for c in range(n):
        nz = m[:, c:, c] != _ZERO
        has = nz.any(axis=1)
        dead |= ~has
        piv = np.argmax(nz, axis=1) + c
        swap = has & (piv != c)
        if swap.any():
            s_idx = idx[swap]
            s_piv = piv[swap]
            row_c = m[s_idx, c].copy()
            m[s_idx, c] = m[s_idx, s_piv]
            m[s_idx, s_piv] = row_c
            negate ^= swap
        pv = np.where(dead, _ONE, m[:, c, c])
        det = _mulmod_vec(det, pv)
        # division-free row update: row_r <- pv*row_r - m[r,c]*row_c scales
        # the determinant by pv, undone with a single inverse at the end
        for r in range(c + 1, n):
            f = m[:, r, c]
            m[:, r, c:] = _submod_vec(_mulmod_vec(pv[:, None], m[:, r, c:]), _mulmod_vec(f[:, None], m[:, c, c:]))
            scale = _mulmod_vec(scale, pv)
    det = _mulmod_vec(det, _powmod_vec(scale, MODULUS - 2))
    det = np.where(negate & (det != _ZERO), _P - det, det)
    return np.where(dead, _ZERO, det)


def _prepare(rows, cols, weights, coefs, points):
    return (
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(cols, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.int64),
        np.ascontiguousarray(coefs, dtype=np.uint64),
        np.ascontiguousarray(points, dtype=np.uint64),
    )


def det_batch(n, rows, cols, weights, coefs, points):
    """Determinants mod 2**61-1 of ``M(y)`` at every entry of ``points``.

    ``M(y)[rows[e], cols[e]] += coefs[e] * y**weights[e]`` for every edge ``e``
    of an ``n x n`` matrix. Returns a uint64 array aligned with ``points``.
    """
    if USE_NUMBA:
        return det_batch_numba(n, rows, cols, weights, coefs, points)
    return det_batch_numpy(n, rows, cols, weights, coefs, points)


# ---------------------------------------------------------------------------
# density gap function f(x, y) = y/x + x/(x + 2y - 1) over its domain
# y >= 1, x >= 2y - 1


@njit(cache=True)
def _gap_grid_min_numba_impl(x_max, step):
    best = np.inf
    bx = 0.0
    by = 0.0
    nx = int(np.floor((x_max - 1.0) / step + 1e-9)) + 1
    for ix in range(nx):
        x = 1.0 + ix * step
        y_hi = (x + 1.0) / 2.0
        ny = int(np.floor((y_hi - 1.0) / step + 1e-9)) + 1
        for iy in range(ny):
            y = 1.0 + iy * step
            v = y / x + x / (x + 2.0 * y - 1.0)
            if v < best:
                best = v
                bx = x
                by = y
    return best, bx, by


def gap_grid_min_numba(x_max, step):
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return _gap_grid_min_numba_impl(float(x_max), float(step))


def gap_grid_min_numpy(x_max, step, chunk=256):
    best, bx, by = np.inf, 0.0, 0.0
    nx = int(np.floor((x_max - 1.0) / step + 1e-9)) + 1
    xs_all = 1.0 + np.arange(nx) * step
    for start in range(0, nx, chunk):
        xs = xs_all[start:start + chunk]
        ny = int(np.floor(((xs[-1] + 1.0) / 2.0 - 1.0) / step + 1e-9)) + 1
        ys = 1.0 + np.arange(ny) * step
        x = xs[:, None]
        y = ys[None, :]
        with np.errstate(invalid="ignore"):
            v = y / x + x / (x + 2.0 * y - 1.0)
        v = np.where(x >= 2.0 * y - 1.0, v, np.inf)
        k = int(np.argmin(v))
        i, j = divmod(k, ny)
        if v[i, j] < best:
            best, bx, by = float(v[i, j]), float(xs[i]), float(ys[j])
    return best, bx, by


def gap_grid_min(x_max, step):
    """Minimum of the gap function over the grid ``1 + step*Z`` inside the domain.

    Returns ``(value, x, y)`` of the smallest grid evaluation.
    """
    if USE_NUMBA:
        v, x, y = gap_grid_min_numba(x_max, step)
        return float(v), float(x), float(y)
    return gap_grid_min_numpy(x_max, step)
