"""Percentile bootstrap with reproducible, thread-count-independent draws.

Each replicate r draws from its own counter-based substream keyed by
(master_seed, r), so replicate r sees the same random indices whether
the run uses one worker thread or many, and results land in a
preallocated slot array indexed by r. Reported quantiles are the linear
interpolation (type 7) quantiles of the retained replicate values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data_model import PredictionSample
from .errors import (
    BootstrapRefusedError,
    ComputationError,
    ContractError,
    UndefinedMeasureError,
)
from .metrics import BootstrapCI, MetricEstimate


@dataclass(frozen=True)
class BootstrapSpec:
    replicates: int = 1000
    level: float = 0.95
    master_seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if self.replicates < 1:
            raise ContractError("replicates must be positive")
        if not 0.0 < self.level < 1.0:
            raise ContractError(f"level must be in (0, 1), got {self.level!r}")
        if self.master_seed < 0:
            raise ContractError("master_seed must be a nonnegative integer")


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one unit of work.

    Counter-based (Philox) and keyed by the full path, so any unit can
    be regenerated in isolation and work can be distributed across
    threads without changing what any unit draws.
    """
    seq = np.random.SeedSequence((int(master_seed),) + tuple(int(v) for v in path))
    return np.random.Generator(np.random.Philox(seed=seq))


def resample_indices(rng: np.random.Generator, sample: PredictionSample,
                     stratified: bool = False) -> np.ndarray:
    n = len(sample)
    if not stratified:
        return rng.integers(0, n, size=n)
    parts = []
    for cls in (1, 0):
        pool = np.flatnonzero(sample.outcomes == cls)
        if pool.shape[0]:
            parts.append(pool[rng.integers(0, pool.shape[0], size=pool.shape[0])])
    return np.concatenate(parts)


def _type7(sorted_values: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile of pre-sorted data.

    Same arithmetic as the NumPy default, except that interpolating
    between two equal order statistics returns that value directly, so
    a quantile landing between two infinite replicate values is that
    infinity rather than inf - inf = nan.
    """
    n = sorted_values.shape[0]
    h = (n - 1) * q
    i = int(math.floor(h))
    g = h - i
    lo = float(sorted_values[i])
    hi = float(sorted_values[min(i + 1, n - 1)])
    if g == 0.0 or lo == hi:
        return lo
    return lo + g * (hi - lo)


def bootstrap_ci(sample: PredictionSample, measure, spec: BootstrapSpec,
                 threads: int = 1, name: str | None = None) -> MetricEstimate:
    """Point estimate plus a percentile interval for `measure`.

    `measure` maps a PredictionSample to a float. Replicates on which
    it raises a computation error or returns nan are dropped and
    counted; if more than half drop, the interval is refused. Infinite
    values (a diagnostic odds ratio marker, say) are legitimate and
    kept.
    """
    point = measure(sample)
    if isinstance(point, float) and math.isnan(point):
        raise UndefinedMeasureError(
            "point estimate is undefined on the full sample; no interval"
        )

    values = np.full(spec.replicates, np.nan)

    def run_one(r: int):
        rng = substream(spec.master_seed, r)
        idx = resample_indices(rng, sample, spec.stratified)
        try:
            values[r] = measure(sample.subset(idx))
        except ComputationError:
            pass  # leave the slot as nan; it will be dropped and counted

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_one, range(spec.replicates)))
    else:
        for r in range(spec.replicates):
            run_one(r)

    kept = values[~np.isnan(values)]
    dropped = spec.replicates - kept.shape[0]
    if dropped * 2 > spec.replicates:
        raise BootstrapRefusedError(
            f"{dropped} of {spec.replicates} replicates undefined; "
            "refusing to report an interval",
            dropped=dropped, replicates=spec.replicates,
        )
    alpha = 1.0 - spec.level
    kept.sort()
    lo = _type7(kept, alpha / 2.0)
    hi = _type7(kept, 1.0 - alpha / 2.0)
    ci = BootstrapCI(
        lower=float(lo), upper=float(hi), level=spec.level,
        replicates=spec.replicates, seed=spec.master_seed, dropped=dropped,
    )
    if name is None:
        name = getattr(measure, "__name__", "measure")
    return MetricEstimate(name=name, value=float(point), ci=ci)
