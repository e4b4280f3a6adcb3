"""Pure NumPy implementation of the local-linear tricube smoother.

Semantics match riskbench._speedups.local_linear_smooth exactly; see
that module for the pinned definition. Used when the compiled extension
is unavailable or disabled via RISKBENCH_PURE_PYTHON=1.
"""

import math

import numpy as np

# Cap on the number of cells in a distance matrix chunk (about 16 MB).
_CHUNK_CELLS = 2_000_000


def local_linear_smooth(x, y, x_eval, span):
    """Fit y on x locally at each point of x_eval; returns fitted values."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    xe = np.ascontiguousarray(x_eval, dtype=np.float64)
    if x.shape[0] != y.shape[0]:
        raise ValueError("x and y must have equal length")
    n = x.shape[0]
    if n == 0:
        raise ValueError("cannot smooth an empty sample")
    if n == 1:
        return np.full(xe.shape[0], y[0])
    q = min(n, max(2, math.ceil(span * n)))

    out = np.empty(xe.shape[0])
    step = max(1, _CHUNK_CELLS // n)
    for s in range(0, xe.shape[0], step):
        block = xe[s:s + step]
        dx = x[None, :] - block[:, None]
        dist = np.abs(dx)
        h = np.partition(dist, q - 1, axis=1)[:, q - 1]
        zero_h = h == 0.0
        hsafe = np.where(zero_h, 1.0, h)
        u = dist / hsafe[:, None]
        w = np.where(u < 1.0, (1.0 - u ** 3) ** 3, 0.0)
        sw = w.sum(axis=1)
        dead = (sw <= 0.0) & ~zero_h
        if dead.any():
            w[dead] = (dist[dead] <= h[dead, None]).astype(float)
            sw = w.sum(axis=1)
        swx = (w * dx).sum(axis=1)
        swy = (w * y).sum(axis=1)
        swxx = (w * dx * dx).sum(axis=1)
        swxy = (w * dx * y).sum(axis=1)
        denom = sw * swxx - swx * swx
        ok = denom > 1e-12 * sw * swxx
        sw_safe = np.where(sw == 0.0, 1.0, sw)
        fit = np.where(
            ok,
            (swxx * swy - swx * swxy) / np.where(ok, denom, 1.0),
            swy / sw_safe,
        )
        if zero_h.any():
            dup = dist[zero_h] == 0.0
            fit[zero_h] = (dup * y).sum(axis=1) / dup.sum(axis=1)
        out[s:s + step] = fit
    return out
