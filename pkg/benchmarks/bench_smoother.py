"""Compare the compiled smoother against the NumPy fallback.

Times riskbench._speedups.local_linear_smooth against the pure-Python
twin on the workload the calibration summaries actually run (fit at
every observed probability, plus a fixed 101-point grid), and checks
that the two backends agree to 1e-10.

Run from the repository root:

    python3 benchmarks/bench_smoother.py
"""

import time

import numpy as np

from riskbench import _smoother_py
from riskbench.calibration import SmootherSettings

try:
    from riskbench import _speedups
except ImportError:
    _speedups = None

# cost grows as n * span*n; 10k keeps the fallback under ten seconds a pass
SIZES = (1_000, 5_000, 10_000)
REPEATS = 3
SPAN = SmootherSettings().span


def workload(n, rng):
    lp = rng.normal(-0.5, 1.2, n)
    p = np.sort(1.0 / (1.0 + np.exp(-lp)))
    y = (rng.random(n) < p).astype(float)
    grid = np.linspace(p[0], p[-1], 101)
    return p, y, grid


def best_of(fn, *args):
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def fmt(seconds):
    return f"{seconds * 1e3:>10.2f}ms"


def main():
    rng = np.random.default_rng(7)
    if _speedups is None:
        print("compiled extension not built; timing the fallback only")
    print(f"span={SPAN}, eval points = n observed + 101 grid, "
          f"best of {REPEATS}")
    print(f"{'n':>8} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for n in SIZES:
        p, y, grid = workload(n, rng)
        xe = np.concatenate([p, grid])
        t_py = best_of(_smoother_py.local_linear_smooth, p, y, xe, SPAN)
        if _speedups is None:
            print(f"{n:>8} {fmt(t_py)} {'-':>12} {'-':>9}")
            continue
        t_ext = best_of(_speedups.local_linear_smooth, p, y, xe, SPAN)
        a = _smoother_py.local_linear_smooth(p, y, xe, SPAN)
        b = _speedups.local_linear_smooth(p, y, xe, SPAN)
        gap = float(np.max(np.abs(a - b)))
        assert gap < 1e-10, f"backends disagree by {gap:g} at n={n}"
        print(f"{n:>8} {fmt(t_py)} {fmt(t_ext)} {t_py / t_ext:>8.1f}x")


if __name__ == "__main__":
    main()
