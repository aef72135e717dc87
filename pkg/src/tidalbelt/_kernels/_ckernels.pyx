# cython: language_level=3
"""Compiled kernel implementations.

Same algorithms and operation order as ``_pykernels``; see that module for
the behavioural contract.  Kept free of the numpy C API on purpose: arrays
are exchanged through typed memoryviews.
"""

from libc.math cimport exp, fabs, lgamma, log

import numpy as np

BACKEND = "cython"

BETA_EPS = 1e-14
BETA_MAX_ITER = 200

cdef double _BETA_EPS = 1e-14
cdef int _BETA_MAX_ITER = 200
cdef double _FPMIN = 1e-300


def moving_average(x, half_window):
    """Centered moving average with truncated edge windows (rolling sum)."""
    cdef const double[::1] data = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t h = int(half_window)
    if h < 1:
        raise ValueError("half_window must be >= 1")
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, hi, new_hi, old_lo, count
    cdef double s = 0.0

    hi = h if h < n - 1 else n - 1
    for j in range(hi + 1):
        s += data[j]
    count = hi + 1
    out[0] = s / count
    for i in range(1, n):
        new_hi = i + h
        if new_hi < n:
            s += data[new_hi]
            count += 1
        old_lo = i - h - 1
        if old_lo >= 0:
            s -= data[old_lo]
            count -= 1
        out[i] = s / count
    return out_arr


def alternating_extrema(x, delta):
    """Alternating trough/peak scan; see _pykernels.alternating_extrema."""
    cdef const double[::1] data = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = data.shape[0]
    cdef double dlt = delta
    if dlt <= 0.0:
        raise ValueError("delta must be positive")
    idx_arr = np.empty(n, dtype=np.int64)
    kind_arr = np.empty(n, dtype=np.int8)
    cdef long long[::1] idx_out = idx_arr
    cdef signed char[::1] kind_out = kind_arr
    cdef Py_ssize_t n_out = 0
    cdef int direction = 0
    cdef double v, max_v, min_v
    cdef Py_ssize_t i, max_i, min_i

    max_v = min_v = data[0] if n else 0.0
    max_i = min_i = 0
    for i in range(1, n):
        v = data[i]
        if direction == 0:
            if v > max_v:
                max_v = v
                max_i = i
            elif v < min_v:
                min_v = v
                min_i = i
            if v <= max_v - dlt:
                idx_out[n_out] = max_i
                kind_out[n_out] = 1
                n_out += 1
                direction = -1
                min_v = v
                min_i = i
            elif v >= min_v + dlt:
                idx_out[n_out] = min_i
                kind_out[n_out] = -1
                n_out += 1
                direction = 1
                max_v = v
                max_i = i
        elif direction > 0:
            if v > max_v:
                max_v = v
                max_i = i
            elif v <= max_v - dlt:
                idx_out[n_out] = max_i
                kind_out[n_out] = 1
                n_out += 1
                direction = -1
                min_v = v
                min_i = i
        else:
            if v < min_v:
                min_v = v
                min_i = i
            elif v >= min_v + dlt:
                idx_out[n_out] = min_i
                kind_out[n_out] = -1
                n_out += 1
                direction = 1
                max_v = v
                max_i = i
    return idx_arr[:n_out].copy(), kind_arr[:n_out].copy()


cdef double _betacf(double a, double b, double x):
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _BETA_EPS:
            break
    return h


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    cdef double da = a
    cdef double db = b
    cdef double dx = x
    cdef double ln_front, front
    if da <= 0.0 or db <= 0.0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= dx <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if dx == 0.0:
        return 0.0
    if dx == 1.0:
        return 1.0
    ln_front = (
        lgamma(da + db)
        - lgamma(da)
        - lgamma(db)
        + da * log(dx)
        + db * log(1.0 - dx)
    )
    front = exp(ln_front)
    if dx < (da + 1.0) / (da + db + 2.0):
        return front * _betacf(da, db, dx) / da
    return 1.0 - front * _betacf(db, da, 1.0 - dx) / db
