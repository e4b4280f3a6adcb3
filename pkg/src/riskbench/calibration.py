"""Calibration assessment and logistic recalibration.

Moment measures (O:E ratio), regression measures (intercept on an
offset, joint intercept-and-slope refit), grouped and smoothed
reliability curves, and the summary indices built on them (ECE on
grouped means, ICI and ECI on the smoothed fit).

The smoothed curve is a local-linear tricube smoother of the outcomes
on the raw probabilities; its settings are pinned in SmootherSettings
so that two runs with the same data agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit

from . import kernels
from .data_model import PredictionSample
from .errors import (
    ContractError,
    ConvergenceError,
    SeparationError,
    SingularModelError,
    UndefinedMeasureError,
)
from .resampling import substream

# Fewer records than this and a smoothed curve is noise, not signal.
MIN_SMOOTHER_N = 20


@dataclass(frozen=True)
class SmootherSettings:
    """Pinned smoother configuration: local linear fit, tricube
    nearest-neighbour weights, evaluated on an equally spaced grid over
    the observed probability range."""

    span: float = 0.75
    grid_points: int = 100

    def __post_init__(self):
        if not 0.0 < self.span <= 1.0:
            raise ContractError(f"span must be in (0, 1], got {self.span!r}")
        if self.grid_points < 2:
            raise ContractError("grid_points must be at least 2")


@dataclass(frozen=True)
class CalibrationCurve:
    """Observed-versus-predicted curve.

    kind "grouped": x are group mean probabilities, y group event
    rates, group_sizes the per-group counts. kind "smoothed": x is the
    evaluation grid, y the clamped smoother fit, fitted the per-record
    fit used by ICI and ECI, lower/upper an optional bootstrap band.
    """

    kind: str
    x: np.ndarray
    y: np.ndarray
    group_sizes: np.ndarray | None = None
    fitted: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("grouped", "smoothed"):
            raise ContractError(f"unknown curve kind {self.kind!r}")
        if len(self.x) != len(self.y):
            raise ContractError("x and y lengths differ")
        if len(self.x) > 1 and not (np.diff(self.x) > 0).all():
            raise ContractError("curve x values must be strictly increasing")


# -- logistic fitting core ----------------------------------------------


def _fit_logistic(y, X, offset=None, max_iter=50, tol=1e-10,
                  separation_watch=(), separation_bound=15.0):
    """Newton-Raphson logistic fit with step halving.

    The log-likelihood is concave, so halving any step that would
    lower it makes the iteration converge from a zero start even when
    the offsets are extreme enough that a raw Newton step saturates
    every fitted probability. separation_watch names coefficient
    indices whose runaway growth, while the likelihood is still
    climbing, is declared separation.
    """
    n, k = X.shape
    beta = np.zeros(k)
    off = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)

    def profile(b):
        eta = off + X @ b
        return eta, float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    eta, ll = profile(beta)
    ll_prev = -math.inf
    trace = []
    for _ in range(max_iter):
        trace.append(ll)
        if ll - ll_prev >= 0 and any(
            abs(beta[j]) > separation_bound for j in separation_watch
        ):
            raise SeparationError(
                "coefficient escaped beyond "
                f"{separation_bound} with the likelihood still increasing; "
                "data are separated on the linear predictor"
            )
        if abs(ll - ll_prev) < tol:
            return beta, trace
        ll_prev = ll
        mu = expit(eta)
        grad = X.T @ (y - mu)
        w = mu * (1.0 - mu)
        hess = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise SingularModelError("singular information matrix") from None
        if not np.all(np.isfinite(step)):
            raise SingularModelError("singular information matrix")
        for _ in range(40):
            eta_new, ll_new = profile(beta + step)
            if ll_new >= ll - 1e-12:
                break
            step = step / 2.0
        beta = beta + step
        eta, ll = eta_new, ll_new
    raise ConvergenceError(
        f"logistic fit did not converge in {max_iter} iterations", trace=trace
    )


def _require_both_classes(sample, what):
    if sample.n_events == 0 or sample.n_nonevents == 0:
        raise UndefinedMeasureError(f"{what} requires both outcome classes")


def oe_ratio(sample: PredictionSample) -> float:
    """Observed events over expected events (the sum of probabilities)."""
    expected = float(sample.probabilities.sum())
    if expected == 0.0:
        raise UndefinedMeasureError("expected event count is zero")
    return sample.n_events / expected


def fit_calibration_intercept(sample: PredictionSample,
                              clamp: float | None = None) -> float:
    """Intercept of a logistic model with the log-odds as a fixed
    offset: calibration-in-the-large on the log-odds scale."""
    _require_both_classes(sample, "calibration intercept")
    L = sample.linear_predictor(clamp)
    y = sample.outcomes.astype(float)
    X = np.ones((len(sample), 1))
    beta, _ = _fit_logistic(y, X, offset=L)
    return float(beta[0])


@dataclass(frozen=True)
class LogisticRecalibration:
    """The map p -> inverse-logit(intercept + slope * logit(p))."""

    intercept: float
    slope: float

    def apply(self, probabilities) -> np.ndarray:
        """Apply the map, preserving ties and (for positive slope)
        strict order exactly.

        The map is evaluated on the sorted distinct values and any
        rounding collision between neighbours is bumped apart by one
        ulp, so ranking measures of the output match the input
        bit-for-bit. Boundary probabilities map to themselves.
        """
        p = np.asarray(probabilities, dtype=float)
        u, inverse = np.unique(p, return_inverse=True)
        with np.errstate(divide="ignore"):
            v = expit(self.intercept + self.slope * logit(u))
        if self.slope > 0:
            for i in range(1, v.shape[0]):
                if v[i] <= v[i - 1] and v[i - 1] < 1.0:
                    v[i] = np.nextafter(v[i - 1], 1.0)
        return v[inverse]


def fit_calibration_slope(sample: PredictionSample,
                          clamp: float | None = None) -> LogisticRecalibration:
    """Joint refit of intercept and slope on the log-odds.

    The slope is the calibration slope; the pair is also the logistic
    recalibration map. Declares separation when the slope passes 15
    while the likelihood still climbs; a constant linear predictor is a
    singular fit.
    """
    _require_both_classes(sample, "calibration slope")
    L = sample.linear_predictor(clamp)
    if np.ptp(L) == 0.0:
        raise SingularModelError("constant linear predictor")
    y = sample.outcomes.astype(float)
    X = np.column_stack([np.ones(len(sample)), L])
    beta, _ = _fit_logistic(y, X, separation_watch=(1,))
    return LogisticRecalibration(intercept=float(beta[0]), slope=float(beta[1]))


def recalibrate(sample: PredictionSample, clamp: float | None = None):
    """Fit the logistic recalibration map and apply it.

    Returns (map, recalibrated sample). Refitting the recalibrated
    sample is a fixed point: intercept near 0, slope near 1.
    """
    fit = fit_calibration_slope(sample, clamp)
    return fit, sample.replace_probabilities(fit.apply(sample.probabilities))


# -- curves ---------------------------------------------------------------


def grouped_calibration(sample: PredictionSample, groups: int = 10) -> CalibrationCurve:
    """Mean outcome against mean probability in equal-size groups cut
    at probability quantiles (stable sort, so ties never straddle a
    boundary nondeterministically). Adjacent groups with identical mean
    probability are merged."""
    if groups < 1:
        raise ContractError("groups must be positive")
    order = np.argsort(sample.probabilities, kind="stable")
    xs, ys, sizes = [], [], []
    for chunk in np.array_split(order, groups):
        if chunk.shape[0] == 0:
            continue
        xs.append(float(sample.probabilities[chunk].mean()))
        ys.append(float(sample.outcomes[chunk].mean()))
        sizes.append(chunk.shape[0])
    mx, my, ms = [xs[0]], [ys[0]], [sizes[0]]
    for x, y, s in zip(xs[1:], ys[1:], sizes[1:]):
        if x == mx[-1]:
            # keep mx[-1] as-is: rebuilding the weighted average of two
            # equal values can drift an ulp and unmerge later ties
            total = ms[-1] + s
            my[-1] = (my[-1] * ms[-1] + y * s) / total
            ms[-1] = total
        else:
            mx.append(x)
            my.append(y)
            ms.append(s)
    return CalibrationCurve(
        kind="grouped",
        x=np.array(mx), y=np.array(my), group_sizes=np.array(ms),
        settings={"groups": groups},
    )


def smoothed_calibration(sample: PredictionSample,
                         settings: SmootherSettings | None = None,
                         band_replicates: int = 0,
                         band_seed: int = 0,
                         band_level: float = 0.95) -> CalibrationCurve:
    """Smoothed observed-event curve over the probability range.

    Fits the local-linear smoother of outcomes on raw probabilities,
    evaluates it on the grid and at every record (the per-record fit
    feeds ICI and ECI), and clamps fitted values into [0, 1]. With
    band_replicates > 0, adds a pointwise percentile bootstrap band on
    the grid.
    """
    settings = settings or SmootherSettings()
    n = len(sample)
    if n < MIN_SMOOTHER_N:
        raise UndefinedMeasureError(
            f"smoothed calibration needs at least {MIN_SMOOTHER_N} records, got {n}"
        )
    p = sample.probabilities
    y = sample.outcomes.astype(float)
    lo, hi = float(p.min()), float(p.max())
    if lo == hi:
        grid = np.array([lo])
    else:
        grid = np.linspace(lo, hi, settings.grid_points)
    fitted = np.clip(kernels.local_linear_smooth(p, y, p, settings.span), 0.0, 1.0)
    gy = np.clip(kernels.local_linear_smooth(p, y, grid, settings.span), 0.0, 1.0)

    lower = upper = None
    meta = {"span": settings.span, "grid_points": settings.grid_points,
            "backend": kernels.backend()}
    if band_replicates > 0:
        sims = np.empty((band_replicates, grid.shape[0]))
        for r in range(band_replicates):
            rng = substream(band_seed, r)
            idx = rng.integers(0, n, size=n)
            sims[r] = np.clip(
                kernels.local_linear_smooth(p[idx], y[idx], grid, settings.span),
                0.0, 1.0,
            )
        alpha = 1.0 - band_level
        lower = np.quantile(sims, alpha / 2.0, axis=0)
        upper = np.quantile(sims, 1.0 - alpha / 2.0, axis=0)
        meta.update({"band_replicates": band_replicates, "band_seed": band_seed,
                     "band_level": band_level})
    return CalibrationCurve(
        kind="smoothed", x=grid, y=gy, fitted=fitted,
        lower=lower, upper=upper, settings=meta,
    )


# -- summary indices ------------------------------------------------------


def ece(sample: PredictionSample, groups: int = 10,
        grouped: CalibrationCurve | None = None) -> float:
    """Expected calibration error: group-size-weighted mean absolute
    gap between grouped observed and predicted."""
    curve = grouped if grouped is not None else grouped_calibration(sample, groups)
    _check_grouped(curve, sample)
    w = curve.group_sizes / curve.group_sizes.sum()
    return float(np.sum(w * np.abs(curve.x - curve.y)))


def ici(sample: PredictionSample, settings: SmootherSettings | None = None,
        smoothed: CalibrationCurve | None = None) -> float:
    """Integrated calibration index: mean absolute distance between
    each probability and the smoothed observed rate at it."""
    curve = smoothed if smoothed is not None else smoothed_calibration(sample, settings)
    _check_smoothed(curve, sample)
    return float(np.mean(np.abs(sample.probabilities - curve.fitted)))


def eci(sample: PredictionSample, settings: SmootherSettings | None = None,
        smoothed: CalibrationCurve | None = None, normalize: bool = True) -> float:
    """Estimated calibration index: mean squared distance between the
    probabilities and the smoothed observed rates, by default divided
    by the same distance measured against the flat mean-outcome model."""
    curve = smoothed if smoothed is not None else smoothed_calibration(sample, settings)
    _check_smoothed(curve, sample)
    num = float(np.mean((sample.probabilities - curve.fitted) ** 2))
    if not normalize:
        return num
    den = float(np.mean((sample.probabilities - sample.prevalence) ** 2))
    if den == 0.0:
        return math.nan
    return num / den


def calibration_summaries(sample: PredictionSample,
                          grouped: CalibrationCurve | None = None,
                          smoothed: CalibrationCurve | None = None,
                          groups: int = 10,
                          settings: SmootherSettings | None = None,
                          normalize_eci: bool = True) -> dict:
    """ECE, ICI and ECI together, reusing supplied curves when given."""
    if grouped is None:
        grouped = grouped_calibration(sample, groups)
    if smoothed is None:
        smoothed = smoothed_calibration(sample, settings)
    return {
        "ece": ece(sample, grouped=grouped),
        "ici": ici(sample, smoothed=smoothed),
        "eci": eci(sample, smoothed=smoothed, normalize=normalize_eci),
    }


def _check_grouped(curve, sample):
    if curve.kind != "grouped" or curve.group_sizes is None:
        raise ContractError("expected a grouped calibration curve")
    if int(curve.group_sizes.sum()) != len(sample):
        raise ContractError("grouped curve does not cover this sample")


def _check_smoothed(curve, sample):
    if curve.kind != "smoothed" or curve.fitted is None:
        raise ContractError("expected a smoothed calibration curve")
    if curve.fitted.shape[0] != len(sample):
        raise ContractError("smoothed curve was built on a different sample")


@dataclass(frozen=True)
class SubgroupCalibration:
    curves: dict
    flagged: dict


def subgroup_calibration(sample: PredictionSample, kind: str = "smoothed",
                         groups: int = 10,
                         settings: SmootherSettings | None = None,
                         min_size: int = MIN_SMOOTHER_N) -> SubgroupCalibration:
    """Calibration curve per subgroup label.

    Subgroups below the size floor are flagged with a reason instead of
    producing an unstable curve; the rest are returned.
    """
    if kind not in ("smoothed", "grouped"):
        raise ContractError(f"unknown curve kind {kind!r}")
    curves, flagged = {}, {}
    for label, part in sample.by_group().items():
        if len(part) < min_size:
            flagged[label] = f"subgroup has {len(part)} records, below floor {min_size}"
            continue
        if kind == "smoothed":
            curves[label] = smoothed_calibration(part, settings)
        else:
            curves[label] = grouped_calibration(part, groups)
    return SubgroupCalibration(curves=curves, flagged=flagged)
