"""Performance measure kernels.

Every function here returns plain floats (or small dataclasses of
floats). Measures that do not exist for particular count patterns
follow two conventions:

* functions returning a single measure raise UndefinedMeasureError,
* functions returning a panel mark the impossible entries as nan and
  keep the rest, so one degenerate denominator does not hide the
  remaining results. A diagnostic odds ratio with no false results at
  all is reported as +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data_model import CostSpec, PredictionSample, ThresholdSpec
from .errors import ContractError, UndefinedMeasureError


@dataclass(frozen=True)
class BootstrapCI:
    """Percentile interval from a bootstrap run."""

    lower: float
    upper: float
    level: float
    replicates: int
    seed: int
    dropped: int = 0

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ContractError(f"level must be in (0, 1), got {self.level!r}")
        if not self.lower <= self.upper:
            raise ContractError(f"interval bounds out of order: {self!r}")


@dataclass(frozen=True)
class MetricEstimate:
    """A named point estimate with an optional confidence interval."""

    name: str
    value: float
    ci: BootstrapCI | None = None


@dataclass(frozen=True)
class ConfusionCounts:
    """2x2 classification table at a fixed threshold."""

    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float

    def __post_init__(self):
        for f in ("tp", "fp", "tn", "fn"):
            if getattr(self, f) < 0:
                raise ContractError(f"negative count {f}")
        if self.n == 0:
            raise ContractError("empty confusion table")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def n_events(self) -> int:
        return self.tp + self.fn

    @property
    def n_nonevents(self) -> int:
        return self.fp + self.tn


def _threshold_value(t) -> float:
    if isinstance(t, ThresholdSpec):
        return t.t
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ContractError(f"threshold must be inside (0, 1), got {t!r}")
    return t


def confusion_at_threshold(sample: PredictionSample, t) -> ConfusionCounts:
    """Classify as high risk when probability is equal to or higher
    than the threshold, then cross-tabulate against outcomes."""
    t = _threshold_value(t)
    pred = sample.probabilities >= t
    y = sample.outcomes == 1
    return ConfusionCounts(
        tp=int(np.count_nonzero(pred & y)),
        fp=int(np.count_nonzero(pred & ~y)),
        tn=int(np.count_nonzero(~pred & ~y)),
        fn=int(np.count_nonzero(~pred & y)),
        threshold=t,
    )


def classification_from_cells(tp, fp, tn, fn) -> dict:
    """All classification measures from (possibly fractional) cells.

    Fractional cells let the same formulas serve expected tables, for
    example a table built from prevalence, sensitivity and specificity
    alone. Entries with zero denominators are nan.
    """
    tp, fp, tn, fn = float(tp), float(fp), float(tn), float(fn)
    n = tp + fp + tn + fn
    pos = tp + fn
    neg = fp + tn
    sens = tp / pos if pos > 0 else math.nan
    spec = tn / neg if neg > 0 else math.nan
    ppv = tp / (tp + fp) if tp + fp > 0 else math.nan
    npv = tn / (tn + fn) if tn + fn > 0 else math.nan
    accuracy = (tp + tn) / n
    balanced = (sens + spec) / 2.0
    youden = sens + spec - 1.0
    if fp * fn == 0.0:
        dor = math.inf if tp * tn > 0.0 else math.nan
    else:
        dor = (tp * tn) / (fp * fn)
    kappa_den = n * n - ((tp + fp) * pos + neg * (tn + fn))
    kappa_num = n * (tp + tn) - ((tp + fp) * pos + neg * (tn + fn))
    kappa = kappa_num / kappa_den if kappa_den != 0.0 else math.nan
    f1 = 2.0 * tp / (2.0 * tp + fp + fn) if 2.0 * tp + fp + fn > 0 else math.nan
    margins = (tp + fp) * pos * neg * (tn + fn)
    if margins > 0.0:
        mcc = (tp * tn - fp * fn) / math.sqrt(margins)
    else:
        mcc = math.nan
    return {
        "sensitivity": sens,
        "specificity": spec,
        "ppv": ppv,
        "npv": npv,
        "accuracy": accuracy,
        "balanced_accuracy": balanced,
        "youden": youden,
        "dor": dor,
        "kappa": kappa,
        "f1": f1,
        "mcc": mcc,
    }


_PARTIAL_KEYS = ("sensitivity", "specificity", "ppv", "npv")
_SUMMARY_KEYS = ("accuracy", "balanced_accuracy", "youden", "dor", "kappa", "f1", "mcc")


def partial_classification(counts: ConfusionCounts) -> dict:
    """Sensitivity, specificity, PPV and NPV; nan on zero denominators."""
    cells = classification_from_cells(counts.tp, counts.fp, counts.tn, counts.fn)
    return {k: cells[k] for k in _PARTIAL_KEYS}


def summary_classification(counts: ConfusionCounts) -> dict:
    """Single-number classification summaries at the table's threshold."""
    cells = classification_from_cells(counts.tp, counts.fp, counts.tn, counts.fn)
    return {k: cells[k] for k in _SUMMARY_KEYS}


# -- ranking measures ---------------------------------------------------


def _require_both_classes(sample, what):
    if sample.n_events == 0 or sample.n_nonevents == 0:
        raise UndefinedMeasureError(f"{what} requires both outcome classes")


def auroc(sample: PredictionSample) -> float:
    """Probability that a random event outranks a random non-event,
    ties counting one half. Rank-based, so exactly invariant under any
    strictly increasing transform of the probabilities."""
    _require_both_classes(sample, "auroc")
    r = rankdata(sample.probabilities, method="average")
    n1 = sample.n_events
    n0 = sample.n_nonevents
    s = float(r[sample.outcomes == 1].sum())
    return (s - n1 * (n1 + 1) / 2.0) / (n1 * n0)


def _descending_distinct(sample):
    """Cumulative tp and fp after each distinct probability, descending."""
    order = np.argsort(-sample.probabilities, kind="stable")
    p = sample.probabilities[order]
    y = sample.outcomes[order]
    last = np.flatnonzero(np.diff(p) != 0.0)
    last = np.append(last, p.shape[0] - 1)
    ctp = np.cumsum(y)[last].astype(float)
    cfp = (last + 1).astype(float) - ctp
    return p[last], ctp, cfp


def average_precision(sample: PredictionSample) -> float:
    """Area under the precision-recall curve as a step sum over the
    distinct thresholds in descending order."""
    _require_both_classes(sample, "average precision")
    _, ctp, cfp = _descending_distinct(sample)
    recall = ctp / sample.n_events
    precision = ctp / (ctp + cfp)
    return float(np.sum(np.diff(recall, prepend=0.0) * precision))


def partial_auroc(sample: PredictionSample, band, kind: str = "sensitivity",
                  rescale: bool = False) -> float:
    """Ranking area restricted to a band of the curve.

    `kind` selects the axis the band lives on: "sensitivity" (the usual
    high-sensitivity region), "fpr", or "specificity" (translated to an
    fpr band). Unnormalized: a perfect model scores the band width.
    With `rescale`, mapped so chance is 0.5 and perfection 1.0.
    """
    if isinstance(band, ThresholdSpec):
        if band.sensitivity_band is not None:
            band, kind = band.sensitivity_band, "sensitivity"
        elif band.fpr_band is not None:
            band, kind = band.fpr_band, "fpr"
        else:
            raise ContractError("ThresholdSpec carries no band")
    lo, hi = float(band[0]), float(band[1])
    if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
        raise ContractError(f"band bounds must lie in [0, 1]: {band!r}")
    if not lo < hi:
        raise UndefinedMeasureError("empty band")
    if kind == "specificity":
        lo, hi, kind = 1.0 - hi, 1.0 - lo, "fpr"
    if kind not in ("sensitivity", "fpr"):
        raise ContractError(f"unknown band kind {kind!r}")
    _require_both_classes(sample, "partial auroc")

    p = sample.probabilities
    y = sample.outcomes
    if kind == "sensitivity":
        sweep = np.sort(p[y == 1])[::-1]
        other = np.sort(p[y == 0])
    else:
        sweep = np.sort(p[y == 0])[::-1]
        other = np.sort(p[y == 1])
    n_sweep = sweep.shape[0]
    n_other = other.shape[0]
    below = np.searchsorted(other, sweep, side="left")
    ties = np.searchsorted(other, sweep, side="right") - below
    height = (below + 0.5 * ties) / n_other
    k = np.arange(1, n_sweep + 1, dtype=float)
    overlap = np.clip(
        np.minimum(k / n_sweep, hi) - np.maximum((k - 1.0) / n_sweep, lo),
        0.0, None,
    )
    area = float(np.sum(overlap * height))

    if not rescale:
        return area
    width = hi - lo
    half_sq = (hi * hi - lo * lo) / 2.0
    # chance diagonal: specificity = 1 - sensitivity, or sensitivity = fpr
    area_null = width - half_sq if kind == "sensitivity" else half_sq
    return 0.5 * (1.0 + (area - area_null) / (width - area_null))


# -- overall measures ---------------------------------------------------

OVERALL_KEYS = (
    "loglikelihood", "logloss", "brier", "scaled_brier", "mcfadden_r2",
    "coxsnell_r2", "nagelkerke_r2", "discrimination_slope", "mape",
)


def overall_measures(sample: PredictionSample, clamp: float | None = None) -> dict:
    """The nine overall performance values, computed together because
    they share the likelihood and the error vector.

    Entries that need the log-likelihood are nan when probabilities of
    exactly 0 or 1 are present and no clamping epsilon was supplied.
    The epsilon touches only that family; the error-vector measures
    always use the probabilities as given. Entries that need both
    outcome classes are nan for one-class data.
    """
    p = sample.probabilities
    y = sample.outcomes.astype(float)
    n = sample.n
    prev = sample.prevalence
    err = y - p
    out = dict.fromkeys(OVERALL_KEYS, math.nan)
    out["brier"] = float(np.mean(err * err))
    out["mape"] = float(np.mean(np.abs(err)))

    both = 0 < sample.n_events < n
    if both:
        out["discrimination_slope"] = float(
            np.mean(p[y == 1.0]) - np.mean(p[y == 0.0])
        )
        null_sq = float(np.mean((y - prev) ** 2))
        out["scaled_brier"] = 1.0 - out["brier"] / null_sq

    pl = sample.clamped_probabilities(clamp)
    if ((pl > 0.0) & (pl < 1.0)).all():
        ll = float(np.sum(np.where(y == 1.0, np.log(pl), np.log1p(-pl))))
        out["loglikelihood"] = ll
        out["logloss"] = -ll / n
        if both:
            l0 = n * (prev * math.log(prev) + (1 - prev) * math.log(1 - prev))
            out["mcfadden_r2"] = 1.0 - ll / l0
            cox = 1.0 - math.exp((l0 - ll) * 2.0 / n)
            out["coxsnell_r2"] = cox
            out["nagelkerke_r2"] = cox / (1.0 - math.exp(l0 * 2.0 / n))
    return out


# -- clinical utility ---------------------------------------------------


def net_benefit(counts: ConfusionCounts) -> dict:
    """Net benefit of the classifier at the table's threshold, with the
    treat-all and treat-none reference strategies and the standardized
    (divided by prevalence) variants."""
    t = counts.threshold
    n = counts.n
    w = t / (1.0 - t)
    nb = counts.tp / n - (counts.fp / n) * w
    nb_all = counts.n_events / n - (counts.n_nonevents / n) * w
    prev = counts.n_events / n
    snb = nb / prev if prev > 0 else math.nan
    snb_all = nb_all / prev if prev > 0 else math.nan
    return {
        "net_benefit": nb,
        "standardized_net_benefit": snb,
        "net_benefit_all": nb_all,
        "net_benefit_none": 0.0,
        "standardized_net_benefit_all": snb_all,
    }


def expected_cost(counts: ConfusionCounts, costs: CostSpec) -> float:
    """Mean misclassification cost per subject."""
    n = counts.n
    return (counts.fn / n) * costs.cost_fn + (counts.fp / n) * costs.cost_fp


@dataclass(frozen=True)
class MinCostResult:
    ec_min: float
    t_star: float


def min_expected_cost(sample: PredictionSample, costs: CostSpec) -> MinCostResult:
    """Smallest expected cost over every achievable classification.

    Candidate thresholds are the distinct predicted probabilities (the
    lowest one is treat-all) plus 1.0 for treat-none. Expected cost is a
    step function of the threshold, so this scan is exhaustive. Ties are
    broken toward the smallest threshold.
    """
    values, ctp, cfp = _descending_distinct(sample)
    n = sample.n
    n1 = sample.n_events
    fn = n1 - ctp
    ec = (fn / n) * costs.cost_fn + (cfp / n) * costs.cost_fp
    ts = values
    if values[0] < 1.0:
        ts = np.append(values, 1.0)
        ec = np.append(ec, (n1 / n) * costs.cost_fn)
    best = float(np.min(ec))
    t_star = float(np.min(ts[ec == best]))
    return MinCostResult(ec_min=best, t_star=t_star)
