"""Pure-Python kernel implementations.

These are the reference implementations of the numeric inner loops: a
truncated centered moving average, the alternating extrema scan used for
breath segmentation, and the regularized incomplete beta function behind
the t / F survival functions.  The compiled backend in ``_ckernels.pyx``
performs the same operations in the same order, so for a given input both
backends produce identical extremum indices and floating-point results that
agree to the last few ulps (the moving average is bit-identical; the beta
continued fraction may differ by compiler instruction scheduling).
"""

import math

import numpy as np

BACKEND = "python"

# Continued-fraction convergence for the incomplete beta function.
BETA_EPS = 1e-14
BETA_MAX_ITER = 200
_FPMIN = 1e-300


def moving_average(x, half_window):
    """Centered moving average with truncated edge windows.

    Element ``i`` is the mean of ``x[max(0, i-h) : min(n, i+h+1)]`` where
    ``h = half_window``; near the edges the window simply contains fewer
    samples.  Runs a rolling sum, O(n).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    h = int(half_window)
    if h < 1:
        raise ValueError("half_window must be >= 1")
    out = np.empty(n, dtype=np.float64)
    data = x.tolist()

    hi = min(h, n - 1)
    s = 0.0
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
    return out


def alternating_extrema(x, delta):
    """Scan for alternating troughs and peaks separated by at least ``delta``.

    Implements the classic running min/max extremum detector: while rising,
    track the running maximum; once the signal drops ``delta`` below it, emit
    that maximum as a peak and switch to falling state (and symmetrically for
    troughs).  Consecutive emitted extrema therefore always alternate in kind
    and differ in value by at least ``delta``.  Ties during the running
    min/max update are resolved by keeping the first sample of a plateau.

    Returns ``(indices, kinds)`` as int64/int8 arrays, ``kinds[i]`` being
    +1 for a peak and -1 for a trough.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    idx_out = []
    kind_out = []
    data = x.tolist()

    direction = 0
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
            if v <= max_v - delta:
                idx_out.append(max_i)
                kind_out.append(1)
                direction = -1
                min_v = v
                min_i = i
            elif v >= min_v + delta:
                idx_out.append(min_i)
                kind_out.append(-1)
                direction = 1
                max_v = v
                max_i = i
        elif direction > 0:
            if v > max_v:
                max_v = v
                max_i = i
            elif v <= max_v - delta:
                idx_out.append(max_i)
                kind_out.append(1)
                direction = -1
                min_v = v
                min_i = i
        else:
            if v < min_v:
                min_v = v
                min_i = i
            elif v >= min_v + delta:
                idx_out.append(min_i)
                kind_out.append(-1)
                direction = 1
                max_v = v
                max_i = i
    return (
        np.asarray(idx_out, dtype=np.int64),
        np.asarray(kind_out, dtype=np.int8),
    )


def _betacf(a, b, x):
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETA_EPS:
            break
    return h


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fastest on the side of the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b
