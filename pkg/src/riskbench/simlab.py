"""Simulation studies of measure behavior.

Two experiments live here:

* a properness study: draw many datasets from a known logistic truth,
  score the true model and ten distorted variants of it on every
  measure, and average; improper measures reward some distortions more
  than the truth, strictly proper ones never do;
* a classification grid study: sweep prevalence, sensitivity and
  specificity over a lattice, compute the summary classification
  measures on the implied expected confusion table, and correlate them.

Every random draw comes from a counter-based substream keyed by
(master_seed, dataset_index) for data and
(master_seed, dataset_index, variant_id) for variant noise, so any
dataset can be regenerated in isolation and thread counts cannot change
results.
"""

from __future__ import annotations

import csv
import functools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri
from scipy.stats import norm, spearmanr

from .calibration import (
    SmootherSettings,
    calibration_summaries,
    fit_calibration_intercept,
    fit_calibration_slope,
    grouped_calibration,
    oe_ratio,
    smoothed_calibration,
)
from .data_model import CostSpec, PredictionSample
from .errors import ComputationError, ContractError
from .metrics import (
    auroc,
    average_precision,
    classification_from_cells,
    confusion_at_threshold,
    min_expected_cost,
    net_benefit,
    overall_measures,
    partial_auroc,
)
from .resampling import substream

_TWO53 = float(2 ** 53)


@dataclass(frozen=True)
class SimulationSpec:
    """Configuration of the properness study's data-generating truth."""

    n_datasets: int = 2000
    n_per_dataset: int = 1000
    predictor_count: int = 4
    predictor_correlation: float = 0.4
    intercept: float = -1.0
    coefficients: tuple = (0.74, 0.18, 0.18, 0.18)
    threshold: float = 0.1
    cost_fn: float = 9.0
    cost_fp: float = 1.0
    master_seed: int = 0
    variants: tuple = tuple(range(1, 12))
    # The distortion pair 5/6 is defined here as a doubling on the
    # log-odds scale; the literal squaring variant is available for
    # comparison but is not what the reference averages describe.
    literal_square: bool = False
    # Multiplier for the piecewise shrink/blow-up distortions (7-9):
    # p -> factor*p below the cut, 1 - factor*(1-p) at or above it.
    # Published mean tables for these variants are reproduced by 0.2.
    piecewise_factor: float = 0.1
    sensitivity_band: tuple = (0.8, 1.0)

    def __post_init__(self):
        k = self.predictor_count
        if len(self.coefficients) != k:
            raise ContractError("one coefficient per predictor required")
        rho = self.predictor_correlation
        if not (-1.0 / (k - 1) < rho < 1.0):
            raise ContractError(
                f"equicorrelation {rho} is not positive definite for {k} predictors"
            )
        if self.n_datasets < 1 or self.n_per_dataset < 2:
            raise ContractError("need at least one dataset of at least two records")
        if not 0.0 < self.threshold < 1.0:
            raise ContractError("threshold must be inside (0, 1)")
        if not 0.0 < self.piecewise_factor < 1.0:
            raise ContractError("piecewise factor must be inside (0, 1)")
        bad = [v for v in self.variants if v not in range(1, 12)]
        if bad:
            raise ContractError(f"unknown variants {bad}")

    @property
    def correlation_matrix(self) -> np.ndarray:
        k = self.predictor_count
        rho = self.predictor_correlation
        return (1.0 - rho) * np.eye(k) + rho * np.ones((k, k))

    @property
    def lp_sd(self) -> float:
        """Standard deviation of the true linear predictor."""
        b = np.asarray(self.coefficients)
        var = (1.0 - self.predictor_correlation) * float(b @ b) \
            + self.predictor_correlation * float(b.sum()) ** 2
        return math.sqrt(var)

    @property
    def costs(self) -> CostSpec:
        return CostSpec(self.cost_fn, self.cost_fp)


@functools.lru_cache(maxsize=32)
def _lp_quadrature(mu: float, sd: float):
    z = np.linspace(-12.0, 12.0, 200_001)
    w = norm.pdf(z)
    return mu + sd * z, w


def true_prevalence(spec: SimulationSpec) -> float:
    """Expected event rate under the truth, by dense quadrature over
    the normal linear predictor."""
    if spec.lp_sd == 0.0:
        return float(expit(spec.intercept))
    lp, w = _lp_quadrature(spec.intercept, spec.lp_sd)
    return float(np.trapezoid(expit(lp) * w, lp) / np.trapezoid(w, lp))


def true_auroc(spec: SimulationSpec) -> float:
    """Population AUROC of the truth: P(LP_event > LP_nonevent)."""
    if spec.lp_sd == 0.0:
        return 0.5  # identical distributions; ties count half
    lp, w = _lp_quadrature(spec.intercept, spec.lp_sd)
    p = expit(lp)
    f1 = p * w
    f0 = (1.0 - p) * w
    mass1 = np.trapezoid(f1, lp)
    mass0 = np.trapezoid(f0, lp)
    # cdf of the non-event linear predictor on the same grid
    cdf0 = np.concatenate([[0.0], np.cumsum(
        (f0[1:] + f0[:-1]) / 2.0 * np.diff(lp))]) / mass0
    return float(np.trapezoid(f1 * cdf0, lp) / mass1)


@dataclass(frozen=True)
class GeneratedDataset:
    index: int
    predictors: np.ndarray
    linear_predictor: np.ndarray
    true_probabilities: np.ndarray
    outcomes: np.ndarray


def generate_dataset(spec: SimulationSpec, index: int) -> GeneratedDataset:
    """Draw one dataset: correlated standard-normal predictors (via
    Cholesky and inverse-CDF uniforms, never 0 or 1 exactly), the true
    probabilities, and Bernoulli outcomes."""
    rng = substream(spec.master_seed, index)
    n, k = spec.n_per_dataset, spec.predictor_count
    u = (rng.integers(0, 2 ** 53, size=(n, k)) + 0.5) / _TWO53
    z = ndtri(u)
    chol = np.linalg.cholesky(spec.correlation_matrix)
    x = z @ chol.T
    lp = spec.intercept + x @ np.asarray(spec.coefficients)
    p = expit(lp)
    y = (rng.random(n) < p).astype(np.int8)
    return GeneratedDataset(
        index=index, predictors=x, linear_predictor=lp,
        true_probabilities=p, outcomes=y,
    )


VARIANT_LABELS = {
    1: "true model",
    2: "log-odds shifted +0.75",
    3: "log-odds shifted -1",
    4: "log-odds shrunk by 1.3",
    5: "log-odds doubled",
    6: "log-odds doubled, shifted -1",
    7: "piecewise distortion around 0.1",
    8: "piecewise distortion around the true prevalence",
    9: "piecewise distortion around 0.5",
    10: "random +/-0.04 noise, 1:1 allocation",
    11: "wrong coefficient on predictor 2",
}

# Variants whose map is strictly increasing in the true probability,
# hence leaves every ranking measure untouched.
RANK_PRESERVING = frozenset(range(1, 10))


def _piecewise(p: np.ndarray, cut: float, factor: float) -> np.ndarray:
    # below the cut, shrink toward 0; at or above, blow up toward 1;
    # the jump at the cut keeps the map strictly increasing
    return np.where(p < cut, factor * p, 1.0 - factor * (1.0 - p))


def variant_probabilities(ds: GeneratedDataset, variant: int,
                          spec: SimulationSpec) -> np.ndarray:
    """Predicted probabilities of one model variant for a dataset."""
    lp = ds.linear_predictor
    p = ds.true_probabilities
    if variant == 1:
        return p
    if variant == 2:
        return expit(lp + 0.75)
    if variant == 3:
        return expit(lp - 1.0)
    if variant == 4:
        return expit(lp / 1.3)
    if variant == 5:
        return expit(lp ** 2) if spec.literal_square else expit(2.0 * lp)
    if variant == 6:
        return expit(lp ** 2 - 1.0) if spec.literal_square else expit(2.0 * lp - 1.0)
    if variant == 7:
        return _piecewise(p, spec.threshold, spec.piecewise_factor)
    if variant == 8:
        return _piecewise(p, true_prevalence(spec), spec.piecewise_factor)
    if variant == 9:
        return _piecewise(p, 0.5, spec.piecewise_factor)
    if variant == 10:
        rng = substream(spec.master_seed, ds.index, variant)
        eligible = np.flatnonzero((p >= 0.051) & (p <= 0.949))
        perm = rng.permutation(eligible)
        half = eligible.shape[0] // 2
        delta = np.zeros_like(p)
        delta[perm[:half]] = 0.04
        delta[perm[half:2 * half]] = -0.04
        if eligible.shape[0] % 2:
            delta[perm[-1]] = 0.04 if rng.random() < 0.5 else -0.04
        return p + delta
    if variant == 11:
        if ds.predictors is None:
            raise ContractError(
                "variant 11 recomputes from predictors, which this dataset lacks"
            )
        wrong = list(spec.coefficients)
        wrong[1] = wrong[0]
        return expit(spec.intercept + ds.predictors @ np.asarray(wrong))
    raise ContractError(f"unknown variant {variant!r}")


# Column layout of the study's value cube.
_A1_COLUMNS = (
    "loglikelihood", "logloss", "brier", "scaled_brier", "mcfadden_r2",
    "coxsnell_r2", "nagelkerke_r2", "discrimination_slope", "mape",
    "auroc", "average_precision", "partial_auroc",
    "oe_ratio", "calibration_intercept", "calibration_slope",
    "eci", "ici", "ece",
    "accuracy", "balanced_accuracy", "youden", "dor", "kappa", "f1", "mcc",
    "net_benefit", "standardized_net_benefit", "expected_cost",
)
_A2_BASE = ("accuracy", "balanced_accuracy", "youden", "dor", "kappa", "f1", "mcc")
STUDY_COLUMNS = _A1_COLUMNS + tuple(
    f"{m}_t_prev" for m in _A2_BASE) + tuple(f"{m}_t_half" for m in _A2_BASE)

_SUMMARY7 = _A2_BASE


def _score_variant(sample: PredictionSample, spec: SimulationSpec,
                   prev_threshold: float, settings: SmootherSettings) -> list:
    """One row of the value cube; undefined entries become nan."""
    row = {}
    row.update(overall_measures(sample))
    for key, fn in (("auroc", auroc), ("average_precision", average_precision)):
        try:
            row[key] = fn(sample)
        except ComputationError:
            row[key] = math.nan
    try:
        row["partial_auroc"] = partial_auroc(sample, spec.sensitivity_band)
    except ComputationError:
        row["partial_auroc"] = math.nan
    try:
        row["oe_ratio"] = oe_ratio(sample)
    except ComputationError:
        row["oe_ratio"] = math.nan
    try:
        row["calibration_intercept"] = fit_calibration_intercept(sample)
    except ComputationError:
        row["calibration_intercept"] = math.nan
    try:
        row["calibration_slope"] = fit_calibration_slope(sample).slope
    except ComputationError:
        row["calibration_slope"] = math.nan
    try:
        summaries = calibration_summaries(
            sample,
            grouped=grouped_calibration(sample, 10),
            smoothed=smoothed_calibration(sample, settings),
        )
        row.update(summaries)
    except ComputationError:
        row.update({"ece": math.nan, "ici": math.nan, "eci": math.nan})

    counts = confusion_at_threshold(sample, spec.threshold)
    cells = classification_from_cells(counts.tp, counts.fp, counts.tn, counts.fn)
    for m in _SUMMARY7:
        row[m] = cells[m]
    nb = net_benefit(counts)
    row["net_benefit"] = nb["net_benefit"]
    row["standardized_net_benefit"] = nb["standardized_net_benefit"]
    row["expected_cost"] = min_expected_cost(sample, spec.costs).ec_min

    for suffix, t in (("_t_prev", prev_threshold), ("_t_half", 0.5)):
        c = confusion_at_threshold(sample, t)
        cl = classification_from_cells(c.tp, c.fp, c.tn, c.fn)
        for m in _SUMMARY7:
            row[m + suffix] = cl[m]
    return [row[k] for k in STUDY_COLUMNS]


@dataclass
class PropernessResult:
    spec: SimulationSpec
    columns: tuple
    values: np.ndarray  # (n_datasets, n_variants, n_columns)
    true_prevalence: float
    true_auroc: float

    @property
    def variant_ids(self) -> tuple:
        return self.spec.variants

    def mean_table(self) -> np.ndarray:
        """(n_variants, n_columns) means, nonfinite entries excluded."""
        vals = self.values
        finite = np.isfinite(vals)
        safe = np.where(finite, vals, 0.0)
        count = finite.sum(axis=0)
        with np.errstate(invalid="ignore"):
            return np.where(count > 0, safe.sum(axis=0) / count, np.nan)

    def exclusion_table(self) -> np.ndarray:
        return (~np.isfinite(self.values)).sum(axis=0)

    def mean(self, column: str, variant: int) -> float:
        vi = self.spec.variants.index(variant)
        ci = self.columns.index(column)
        return float(self.mean_table()[vi, ci])

    def write_csvs(self, outdir):
        import pathlib

        outdir = pathlib.Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        means = self.mean_table()
        excl = self.exclusion_table()
        variant_names = [str(v) for v in self.spec.variants]

        with open(outdir / "variant_means.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["measure"] + [f"variant_{v}" for v in variant_names])
            for ci, col in enumerate(self.columns):
                w.writerow([col] + [repr(float(means[vi, ci]))
                                    for vi in range(len(self.spec.variants))])
        with open(outdir / "exclusions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["measure"] + [f"variant_{v}" for v in variant_names])
            for ci, col in enumerate(self.columns):
                w.writerow([col] + [int(excl[vi, ci])
                                    for vi in range(len(self.spec.variants))])
        qs = (0.05, 0.25, 0.5, 0.75, 0.95)
        with open(outdir / "measure_distributions.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["measure", "variant", "n_used", "mean", "sd"]
                       + [f"q{int(q * 100):02d}" for q in qs])
            for ci, col in enumerate(self.columns):
                for vi, v in enumerate(self.spec.variants):
                    x = self.values[:, vi, ci]
                    x = x[np.isfinite(x)]
                    if x.shape[0] == 0:
                        w.writerow([col, v, 0] + ["nan"] * (2 + len(qs)))
                        continue
                    sd = float(x.std(ddof=1)) if x.shape[0] > 1 else 0.0
                    w.writerow(
                        [col, v, x.shape[0], repr(float(x.mean())), repr(sd)]
                        + [repr(float(q)) for q in np.quantile(x, qs)]
                    )
        meta = {
            "n_datasets": self.spec.n_datasets,
            "n_per_dataset": self.spec.n_per_dataset,
            "master_seed": self.spec.master_seed,
            "threshold": self.spec.threshold,
            "costs": [self.spec.cost_fn, self.spec.cost_fp],
            "variants": list(self.spec.variants),
            "variant_labels": {str(v): VARIANT_LABELS[v] for v in self.spec.variants},
            "true_prevalence": self.true_prevalence,
            "true_auroc": self.true_auroc,
            "columns": list(self.columns),
        }
        with open(outdir / "study_meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_properness_study(spec: SimulationSpec, threads: int = 1) -> PropernessResult:
    """Score every variant on every generated dataset.

    Thread-count independent by construction: dataset i always draws
    from substream (master_seed, i) and writes into slot i.
    """
    prev = true_prevalence(spec)
    settings = SmootherSettings()
    values = np.full(
        (spec.n_datasets, len(spec.variants), len(STUDY_COLUMNS)), np.nan
    )

    def run_one(i: int):
        ds = generate_dataset(spec, i)
        for vi, v in enumerate(spec.variants):
            pv = variant_probabilities(ds, v, spec)
            sample = PredictionSample(pv, ds.outcomes)
            values[i, vi, :] = _score_variant(sample, spec, prev, settings)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_one, range(spec.n_datasets)))
    else:
        for i in range(spec.n_datasets):
            run_one(i)

    return PropernessResult(
        spec=spec, columns=STUDY_COLUMNS, values=values,
        true_prevalence=prev, true_auroc=true_auroc(spec),
    )


# -- classification grid study -------------------------------------------

_LATTICE = tuple(i / 20.0 for i in range(21))
GRID_MEASURES = _SUMMARY7


@dataclass(frozen=True)
class GridSpec:
    """Lattice sweep of prevalence, sensitivity and specificity."""

    prevalence_values: tuple = _LATTICE
    sensitivity_values: tuple = _LATTICE
    specificity_values: tuple = _LATTICE
    # keep only (sens, spec) pairs at least as good as a coin flip;
    # None disables the filter
    min_balanced_accuracy: float | None = 0.5
    profile_pairs: tuple = ((0.9, 0.3), (0.6, 0.6), (0.3, 0.9))

    def __post_init__(self):
        for name in ("prevalence_values", "sensitivity_values",
                     "specificity_values"):
            vals = getattr(self, name)
            if not vals or any(not 0.0 <= v <= 1.0 for v in vals):
                raise ContractError(f"{name} must lie in [0, 1]")


def expected_cells(prevalence: float, sensitivity: float, specificity: float):
    """Expected confusion fractions (unit total) for given operating
    characteristics."""
    tp = prevalence * sensitivity
    fn = prevalence * (1.0 - sensitivity)
    tn = (1.0 - prevalence) * specificity
    fp = (1.0 - prevalence) * (1.0 - specificity)
    return tp, fp, tn, fn


@dataclass
class GridResult:
    spec: GridSpec
    columns: tuple
    rows: np.ndarray
    spearman: np.ndarray
    profiles: np.ndarray

    @property
    def n_combinations(self) -> int:
        return self.rows.shape[0]

    @property
    def n_pairs(self) -> int:
        return len({(r[1], r[2]) for r in self.rows})

    def rows_at_prevalence(self, prevalence: float) -> np.ndarray:
        return self.rows[self.rows[:, 0] == prevalence]

    def profile(self, sensitivity: float, specificity: float) -> np.ndarray:
        mask = (self.profiles[:, 0] == sensitivity) \
            & (self.profiles[:, 1] == specificity)
        return self.profiles[mask]

    def write_csvs(self, outdir):
        import pathlib

        outdir = pathlib.Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "grid_combinations.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([repr(float(v)) for v in row])
        with open(outdir / "grid_spearman.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["measure"] + list(GRID_MEASURES))
            for i, m in enumerate(GRID_MEASURES):
                w.writerow([m] + [repr(float(v)) for v in self.spearman[i]])
        with open(outdir / "grid_profiles.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sensitivity", "specificity", "prevalence"]
                       + list(GRID_MEASURES))
            for row in self.profiles:
                w.writerow([repr(float(v)) for v in row])
        meta = {
            "n_combinations": self.n_combinations,
            "n_pairs": self.n_pairs,
            "min_balanced_accuracy": self.spec.min_balanced_accuracy,
            "profile_pairs": [list(p) for p in self.spec.profile_pairs],
        }
        with open(outdir / "grid_meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_classification_grid(spec: GridSpec | None = None) -> GridResult:
    """Evaluate the summary classification measures on every lattice
    combination passing the balanced-accuracy floor.

    Cells with zero denominators (prevalence 0 or 1, for instance) keep
    nan markers; an infinite diagnostic odds ratio stays infinite in
    the table but both are excluded pairwise from the correlations.
    """
    spec = spec or GridSpec()
    rows = []
    for sens in spec.sensitivity_values:
        for sp in spec.specificity_values:
            if spec.min_balanced_accuracy is not None:
                # integer-exact on the default lattice: the boundary
                # pairs sum to 1 within one ulp, never half a step off
                if (sens + sp) / 2.0 < spec.min_balanced_accuracy - 1e-9:
                    continue
            for prev in spec.prevalence_values:
                cells = classification_from_cells(*expected_cells(prev, sens, sp))
                rows.append([prev, sens, sp] + [cells[m] for m in GRID_MEASURES])
    rows = np.asarray(rows, dtype=float)

    k = len(GRID_MEASURES)
    corr = np.full((k, k), np.nan)
    cols = rows[:, 3:]
    for i in range(k):
        for j in range(k):
            mask = np.isfinite(cols[:, i]) & np.isfinite(cols[:, j])
            if mask.sum() >= 3:
                corr[i, j] = spearmanr(cols[mask, i], cols[mask, j]).statistic
    profiles = []
    for sens, sp in spec.profile_pairs:
        for prev in spec.prevalence_values:
            cells = classification_from_cells(*expected_cells(prev, sens, sp))
            profiles.append([sens, sp, prev] + [cells[m] for m in GRID_MEASURES])
    return GridResult(
        spec=spec,
        columns=("prevalence", "sensitivity", "specificity") + tuple(GRID_MEASURES),
        rows=rows,
        spearman=corr,
        profiles=np.asarray(profiles, dtype=float),
    )
