# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled local-linear smoother with a tricube nearest-neighbour window.

Semantics are pinned and shared bit-for-bit in intent with the pure
NumPy fallback (riskbench._smoother_py):

* window size q = min(n, max(2, ceil(span * n)))
* bandwidth h at an evaluation point = q-th smallest |x_i - x0|
* weights w_i = (1 - u^3)^3 for u = |x_i - x0| / h < 1, else 0
* h == 0 (q or more duplicates): fit = mean of y over x_i == x0
* all weights zero (every window point at distance exactly h):
  uniform weights over d <= h
* degenerate normal equations: fall back to the weighted mean
"""

from libc.math cimport ceil

import numpy as np


def local_linear_smooth(x, y, x_eval, double span):
    """Fit y on x locally at each point of x_eval; returns fitted values."""
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    y_arr = np.ascontiguousarray(y, dtype=np.float64)
    xe_arr = np.ascontiguousarray(x_eval, dtype=np.float64)
    if x_arr.shape[0] != y_arr.shape[0]:
        raise ValueError("x and y must have equal length")
    cdef Py_ssize_t n = x_arr.shape[0]
    cdef Py_ssize_t m = xe_arr.shape[0]
    if n == 0:
        raise ValueError("cannot smooth an empty sample")
    out_arr = np.empty(m, dtype=np.float64)
    if n == 1:
        out_arr[:] = y_arr[0]
        return out_arr

    order = np.argsort(x_arr, kind="stable")
    xs_arr = np.ascontiguousarray(x_arr[order])
    ys_arr = np.ascontiguousarray(y_arr[order])

    cdef const double[::1] xs = xs_arr
    cdef const double[::1] ys = ys_arr
    cdef const double[::1] xe = xe_arr
    cdef double[::1] out = out_arr

    cdef Py_ssize_t q = <Py_ssize_t>ceil(span * n)
    if q < 2:
        q = 2
    if q > n:
        q = n

    cdef Py_ssize_t j, i, lo, hi, a, b, cnt, taken
    cdef double x0, h, dl, dr, u, w, d
    cdef double sw, swx, swy, swxx, swxy, denom, acc

    for j in range(m):
        x0 = xe[j]

        # binary search: first index with xs[i] >= x0
        a = 0
        b = n
        while a < b:
            i = (a + b) >> 1
            if xs[i] < x0:
                a = i + 1
            else:
                b = i
        lo = a
        hi = a
        for taken in range(q):
            if lo == 0:
                hi += 1
            elif hi == n:
                lo -= 1
            else:
                dl = x0 - xs[lo - 1]
                dr = xs[hi] - x0
                if dl <= dr:
                    lo -= 1
                else:
                    hi += 1
        h = x0 - xs[lo]
        if xs[hi - 1] - x0 > h:
            h = xs[hi - 1] - x0

        if h == 0.0:
            # q or more points share x0 exactly; average y over all of them
            while lo > 0 and xs[lo - 1] == x0:
                lo -= 1
            while hi < n and xs[hi] == x0:
                hi += 1
            acc = 0.0
            for i in range(lo, hi):
                acc += ys[i]
            out[j] = acc / (hi - lo)
            continue

        sw = 0.0
        swx = 0.0
        swy = 0.0
        swxx = 0.0
        swxy = 0.0
        for i in range(lo, hi):
            d = xs[i] - x0
            u = d / h
            if u < 0.0:
                u = -u
            if u < 1.0:
                w = 1.0 - u * u * u
                w = w * w * w
            else:
                w = 0.0
            sw += w
            swx += w * d
            swy += w * ys[i]
            swxx += w * d * d
            swxy += w * d * ys[i]
        if sw <= 0.0:
            # boundary-only window: every point sits at distance h.
            # Duplicates at exactly h may extend past the q-point
            # window; the uniform average covers all of them.
            while lo > 0 and x0 - xs[lo - 1] <= h:
                lo -= 1
            while hi < n and xs[hi] - x0 <= h:
                hi += 1
            cnt = 0
            swx = 0.0
            swy = 0.0
            swxx = 0.0
            swxy = 0.0
            for i in range(lo, hi):
                d = xs[i] - x0
                if d <= h and -d <= h:
                    cnt += 1
                    swx += d
                    swy += ys[i]
                    swxx += d * d
                    swxy += d * ys[i]
            sw = cnt
        denom = sw * swxx - swx * swx
        if denom > 1e-12 * sw * swxx:
            out[j] = (swxx * swy - swx * swxy) / denom
        else:
            out[j] = swy / sw
    return out_arr
