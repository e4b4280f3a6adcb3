"""Curve construction: ROC, precision-recall, threshold sweeps,
decision curves, cost curves, risk distributions.

Every curve is a CurveSeries: a column-named table plus metadata, with
deterministic CSV and SVG export (floats serialized via repr, the
shortest round-tripping form, so identical runs produce identical
bytes).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import svg
from .calibration import CalibrationCurve
from .data_model import CostSpec, PredictionSample
from .errors import ContractError, UndefinedMeasureError
from .metrics import (
    _descending_distinct,
    classification_from_cells,
    min_expected_cost,
)

# Everything classification_from_cells knows, plus the ROC-style
# complement so the sensitivity/fpr pairing is drawable directly.
_CLASSIFICATION_MEASURES = (
    "sensitivity", "specificity", "fpr", "ppv", "npv", "accuracy",
    "balanced_accuracy", "youden", "dor", "kappa", "f1", "mcc",
)


@dataclass(frozen=True)
class CurveSeries:
    """A named table of curve points with plotting metadata."""

    kind: str
    columns: tuple
    data: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise ContractError("data shape does not match columns")

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.data:
                w.writerow([repr(float(v)) for v in row])

    def to_svg(self, path):
        recipe = _SVG_RECIPES.get(self.kind)
        if recipe is None:
            raise ContractError(f"no drawing recipe for curve kind {self.kind!r}")
        recipe(self, path)


def roc_curve(sample: PredictionSample) -> CurveSeries:
    """ROC vertices at every distinct threshold, descending, anchored
    at (0, 0); the final vertex is (1, 1)."""
    _require_both(sample, "roc curve")
    values, ctp, cfp = _descending_distinct(sample)
    sens = ctp / sample.n_events
    fpr = cfp / sample.n_nonevents
    rows = np.column_stack([
        np.concatenate([[0.0], fpr]),
        np.concatenate([[0.0], sens]),
        np.concatenate([[math.inf], values]),
    ])
    return CurveSeries(
        kind="roc", columns=("fpr", "sensitivity", "threshold"), data=rows,
        metadata={"n": sample.n, "prevalence": sample.prevalence},
    )


def pr_curve(sample: PredictionSample) -> CurveSeries:
    """Precision-recall steps at every distinct threshold, descending,
    anchored at recall 0 with the first step's precision."""
    _require_both(sample, "precision-recall curve")
    values, ctp, cfp = _descending_distinct(sample)
    recall = ctp / sample.n_events
    precision = ctp / (ctp + cfp)
    rows = np.column_stack([
        np.concatenate([[0.0], recall]),
        np.concatenate([[precision[0]], precision]),
        np.concatenate([[math.inf], values]),
    ])
    return CurveSeries(
        kind="pr", columns=("recall", "precision", "threshold"), data=rows,
        metadata={"n": sample.n, "prevalence": sample.prevalence},
    )


def classification_plot(sample: PredictionSample, measures=("sensitivity", "ppv"),
                        grid=None) -> CurveSeries:
    """Two classification measures swept over thresholds; entries that
    are undefined at a threshold become nan and draw as gaps."""
    if len(measures) != 2:
        raise ContractError("exactly two measures to plot")
    for m in measures:
        if m not in _CLASSIFICATION_MEASURES:
            raise ContractError(f"unknown classification measure {m!r}")
    if grid is None:
        grid = np.linspace(0.01, 0.99, 99)
    grid = np.asarray(grid, dtype=float)
    if not ((grid > 0.0) & (grid < 1.0)).all() or not (np.diff(grid) > 0).all():
        raise ContractError("grid must be strictly increasing inside (0, 1)")
    p = sample.probabilities
    y1 = sample.outcomes == 1
    rows = np.empty((grid.shape[0], 3))
    for i, t in enumerate(grid):
        pred = p >= t
        tp = int(np.count_nonzero(pred & y1))
        fp = int(np.count_nonzero(pred & ~y1))
        cells = classification_from_cells(
            tp, fp, sample.n_nonevents - fp, sample.n_events - tp
        )
        cells["fpr"] = 1.0 - cells["specificity"]
        rows[i] = (t, cells[measures[0]], cells[measures[1]])
    return CurveSeries(
        kind="classification", columns=("threshold",) + tuple(measures),
        data=rows, metadata={"n": sample.n},
    )


def decision_curve(sample: PredictionSample, t_lo: float, t_hi: float,
                   step: float = 0.01, smooth_window: int | None = None) -> CurveSeries:
    """Net benefit over a clinically chosen threshold range.

    The range is mandatory and must be stated by the caller; there is
    deliberately no data-driven default. Optional smoothing is a
    centered moving average with symmetrically shrunken end windows.
    """
    if not (0.0 < t_lo < t_hi < 1.0):
        raise ContractError(
            f"threshold range must satisfy 0 < lo < hi < 1, got [{t_lo}, {t_hi}]"
        )
    if step <= 0.0:
        raise ContractError("step must be positive")
    count = int(math.floor((t_hi - t_lo) / step + 1e-9)) + 1
    grid = t_lo + step * np.arange(count)
    p = sample.probabilities
    y1 = sample.outcomes == 1
    n = sample.n
    prev = sample.prevalence
    cols = ["threshold", "net_benefit", "net_benefit_all", "net_benefit_none",
            "standardized_net_benefit", "standardized_net_benefit_all"]
    rows = np.empty((count, 6))
    for i, t in enumerate(grid):
        pred = p >= t
        tp = np.count_nonzero(pred & y1)
        fp = np.count_nonzero(pred & ~y1)
        w = t / (1.0 - t)
        nb = tp / n - (fp / n) * w
        nb_all = prev - (1.0 - prev) * w
        snb = nb / prev if prev > 0 else math.nan
        snb_all = nb_all / prev if prev > 0 else math.nan
        rows[i] = (t, nb, nb_all, 0.0, snb, snb_all)
    if smooth_window is not None:
        if smooth_window < 3 or smooth_window % 2 == 0:
            raise ContractError("smooth_window must be an odd integer >= 3")
        half = smooth_window // 2
        nb = rows[:, 1]
        smoothed = np.empty(count)
        for i in range(count):
            hw = min(half, i, count - 1 - i)
            smoothed[i] = nb[i - hw:i + hw + 1].mean()
        rows = np.column_stack([rows, smoothed])
        cols.append("net_benefit_smoothed")
    return CurveSeries(
        kind="decision", columns=tuple(cols), data=rows,
        metadata={"n": n, "prevalence": prev, "range": [t_lo, t_hi],
                  "step": step, "smooth_window": smooth_window},
    )


def cost_curve(sample: PredictionSample, c_grid=None) -> CurveSeries:
    """Minimum normalized expected cost against the probability-cost
    index. Each grid value c is the normalized cost of a missed event
    (false alarms cost 1 - c); the x coordinate folds prevalence and c
    together, and values are scaled by the maximum cost rate so the
    treat-none reference is the line y = x and treat-all is y = 1 - x.
    """
    if c_grid is None:
        c_grid = np.linspace(0.01, 0.99, 99)
    c_grid = np.asarray(c_grid, dtype=float)
    if not ((c_grid > 0.0) & (c_grid < 1.0)).all():
        raise ContractError("cost grid values must be inside (0, 1)")
    prev = sample.prevalence
    rows = np.empty((c_grid.shape[0], 5))
    for i, c in enumerate(c_grid):
        scale = prev * c + (1.0 - prev) * (1.0 - c)
        res = min_expected_cost(sample, CostSpec(c, 1.0 - c, normalized=True))
        x = prev * c / scale
        rows[i] = (c, x, res.ec_min / scale, (1.0 - prev) * (1.0 - c) / scale, x)
    order = np.argsort(rows[:, 1], kind="stable")
    return CurveSeries(
        kind="cost", columns=("cost_fn", "pc_plus", "ec_model", "ec_all", "ec_none"),
        data=rows[order], metadata={"n": sample.n, "prevalence": prev},
    )


_QUANTS = (0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


def risk_distribution(sample: PredictionSample, bins: int = 10,
                      grid_points: int = 101) -> CurveSeries:
    """Predicted-risk densities for events and non-events on a fixed
    [0, 1] grid (Gaussian kernel, normal-reference bandwidth), with
    per-class histograms, quantiles and means in the metadata.

    An absent class keeps its column as nan and is flagged in the
    metadata rather than failing the whole artifact.
    """
    grid = np.linspace(0.0, 1.0, grid_points)
    edges = np.linspace(0.0, 1.0, bins + 1)
    out = {}
    dens_cols = []
    for label, mask in (("events", sample.outcomes == 1),
                        ("nonevents", sample.outcomes == 0)):
        p = sample.probabilities[mask]
        n = int(p.shape[0])
        info = {"n": n}
        if n == 0:
            info["note"] = "class absent"
            info["mean"] = None
            dens_cols.append(np.full(grid_points, np.nan))
            out[label] = info
            continue
        info["mean"] = float(p.mean())
        info["quantiles"] = {str(q): float(v) for q, v in
                             zip(_QUANTS, np.quantile(p, _QUANTS))}
        info["histogram"] = [int(v) for v in np.histogram(p, bins=edges)[0]]
        sd = float(p.std(ddof=1)) if n > 1 else 0.0
        iqr = float(np.quantile(p, 0.75) - np.quantile(p, 0.25))
        h = 0.9 * min(sd, iqr / 1.34 if iqr > 0 else math.inf) * n ** (-0.2)
        if not h > 0.0:
            info["note"] = "degenerate spread, no density"
            dens_cols.append(np.full(grid_points, np.nan))
            out[label] = info
            continue
        info["bandwidth"] = h
        dens = norm.pdf((grid[:, None] - p[None, :]) / h).mean(axis=1) / h
        dens_cols.append(dens)
        out[label] = info
    rows = np.column_stack([grid, dens_cols[0], dens_cols[1]])
    return CurveSeries(
        kind="risk_density",
        columns=("p", "density_events", "density_nonevents"),
        data=rows,
        metadata={"bin_edges": [float(v) for v in edges], **out},
    )


def calibration_series(curve: CalibrationCurve) -> CurveSeries:
    """Adapt a calibration curve for CSV/SVG export."""
    cols = ["predicted", "observed"]
    parts = [curve.x, curve.y]
    if curve.kind == "grouped":
        cols.append("group_size")
        parts.append(curve.group_sizes.astype(float))
    if curve.lower is not None:
        cols += ["lower", "upper"]
        parts += [curve.lower, curve.upper]
    return CurveSeries(
        kind=f"calibration_{curve.kind}", columns=tuple(cols),
        data=np.column_stack(parts),
        metadata=dict(curve.settings),
    )


def _require_both(sample, what):
    if sample.n_events == 0 or sample.n_nonevents == 0:
        raise UndefinedMeasureError(f"{what} requires both outcome classes")


# -- SVG recipes ----------------------------------------------------------


def _svg_roc(series, path):
    svg.render(path, [
        {"type": "segment", "x1": 0, "y1": 0, "x2": 1, "y2": 1},
        {"type": "line", "x": series.column("fpr"),
         "y": series.column("sensitivity"), "name": "model"},
    ], title="ROC curve", x_label="1 - specificity", y_label="sensitivity",
        xlim=(0, 1), ylim=(0, 1))


def _svg_pr(series, path):
    prev = series.metadata.get("prevalence")
    layers = []
    if prev is not None:
        layers.append({"type": "segment", "x1": 0, "y1": prev, "x2": 1, "y2": prev})
    layers.append({"type": "line", "x": series.column("recall"),
                   "y": series.column("precision"), "name": "model"})
    svg.render(path, layers, title="Precision-recall curve",
               x_label="recall (sensitivity)", y_label="precision (PPV)",
               xlim=(0, 1), ylim=(0, 1))


def _svg_classification(series, path):
    m1, m2 = series.columns[1], series.columns[2]
    svg.render(path, [
        {"type": "line", "x": series.column("threshold"),
         "y": series.column(m1), "name": m1},
        {"type": "line", "x": series.column("threshold"),
         "y": series.column(m2), "name": m2, "dashed": True},
    ], title="Classification measures by threshold",
        x_label="decision threshold", y_label="measure value",
        xlim=(0, 1))


def _svg_decision(series, path):
    t = series.column("threshold")
    layers = [
        {"type": "line", "x": t, "y": series.column("net_benefit"),
         "name": "model"},
        {"type": "line", "x": t, "y": series.column("net_benefit_all"),
         "name": "treat all", "dashed": True},
        {"type": "line", "x": t, "y": series.column("net_benefit_none"),
         "name": "treat none", "dashed": True},
    ]
    if "net_benefit_smoothed" in series.columns:
        layers.append({"type": "line", "x": t,
                       "y": series.column("net_benefit_smoothed"),
                       "name": "model (smoothed)"})
    svg.render(path, layers, title="Decision curve",
               x_label="decision threshold", y_label="net benefit")


def _svg_cost(series, path):
    x = series.column("pc_plus")
    svg.render(path, [
        {"type": "line", "x": x, "y": series.column("ec_model"), "name": "model"},
        {"type": "line", "x": x, "y": series.column("ec_all"),
         "name": "treat all", "dashed": True},
        {"type": "line", "x": x, "y": series.column("ec_none"),
         "name": "treat none", "dashed": True},
    ], title="Cost curve", x_label="probability-cost index",
        y_label="normalized expected cost", xlim=(0, 1), ylim=(0, 1))


def _svg_risk_density(series, path):
    svg.render(path, [
        {"type": "line", "x": series.column("p"),
         "y": series.column("density_events"), "name": "events"},
        {"type": "line", "x": series.column("p"),
         "y": series.column("density_nonevents"), "name": "non-events",
         "dashed": True},
    ], title="Predicted risk distribution", x_label="predicted probability",
        y_label="density", xlim=(0, 1))


def _svg_calibration(series, path):
    layers = [{"type": "segment", "x1": 0, "y1": 0, "x2": 1, "y2": 1}]
    if "lower" in series.columns:
        layers.append({"type": "band", "x": series.column("predicted"),
                       "y": series.column("lower"), "y2": series.column("upper")})
    if series.kind == "calibration_grouped":
        layers.append({"type": "points", "x": series.column("predicted"),
                       "y": series.column("observed"), "name": "groups"})
    else:
        layers.append({"type": "line", "x": series.column("predicted"),
                       "y": series.column("observed"), "name": "smoothed"})
    svg.render(path, layers, title="Calibration curve",
               x_label="predicted probability", y_label="observed proportion",
               xlim=(0, 1), ylim=(0, 1))


_SVG_RECIPES = {
    "roc": _svg_roc,
    "pr": _svg_pr,
    "classification": _svg_classification,
    "decision": _svg_decision,
    "cost": _svg_cost,
    "risk_density": _svg_risk_density,
    "calibration_grouped": _svg_calibration,
    "calibration_smoothed": _svg_calibration,
}
