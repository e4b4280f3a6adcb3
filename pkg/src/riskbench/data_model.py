"""Validated container for risk predictions paired with observed outcomes.

A record is a predicted probability in [0, 1] and a binary outcome in
{0, 1}, optionally carrying an identifier and a subgroup label.
Probabilities of exactly 0 or 1 are admitted but any operation that
needs the log-odds refuses them unless a clamping policy is supplied.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logit

from .errors import (
    ContractError,
    EmptyInputError,
    SchemaError,
    UndefinedMeasureError,
    ValidationError,
)

# Epsilon used when a caller enables clamping without choosing a value.
DEFAULT_CLAMP = 1e-9


@dataclass(frozen=True)
class PredictionRecord:
    """One prediction: probability, outcome, optional id and group."""

    probability: float
    outcome: int
    id: str | None = None
    group: str | None = None

    def __post_init__(self):
        p = self.probability
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise ValidationError(f"probability must be a number, got {p!r}")
        if not math.isfinite(p) or not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability out of [0, 1]: {p!r}")
        if self.outcome not in (0, 1):
            raise ValidationError(f"outcome must be 0 or 1, got {self.outcome!r}")


class PredictionSample:
    """Immutable collection of prediction records.

    Parameters
    ----------
    probabilities, outcomes : array-like
        Same length; probabilities in [0, 1], outcomes in {0, 1}.
    ids, groups : sequence of str, optional
    """

    def __init__(self, probabilities, outcomes, ids=None, groups=None):
        p = np.asarray(probabilities, dtype=float)
        y = np.asarray(outcomes)
        if p.ndim != 1 or y.ndim != 1:
            raise ValidationError("probabilities and outcomes must be 1-d")
        if p.shape[0] != y.shape[0]:
            raise ContractError(
                f"length mismatch: {p.shape[0]} probabilities, {y.shape[0]} outcomes"
            )
        if p.shape[0] == 0:
            raise EmptyInputError("no records")
        bad = ~np.isfinite(p) | (p < 0.0) | (p > 1.0)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValidationError(f"probability out of [0, 1]: {p[i]!r}", row=i)
        yf = np.asarray(y, dtype=float)
        if not np.isin(yf, (0.0, 1.0)).all():
            i = int(np.flatnonzero(~np.isin(yf, (0.0, 1.0)))[0])
            raise ValidationError(f"outcome must be 0 or 1, got {y[i]!r}", row=i)
        for name, seq in (("ids", ids), ("groups", groups)):
            if seq is not None and len(seq) != p.shape[0]:
                raise ContractError(f"{name} length does not match records")
        self._p = p.copy()
        self._y = yf.astype(np.int8)
        self._p.setflags(write=False)
        self._y.setflags(write=False)
        self._ids = None if ids is None else tuple(str(v) for v in ids)
        self._groups = None if groups is None else tuple(str(v) for v in groups)

    @classmethod
    def from_records(cls, records) -> "PredictionSample":
        records = list(records)
        if not records:
            raise EmptyInputError("no records")
        ids = [r.id for r in records]
        groups = [r.group for r in records]
        return cls(
            [r.probability for r in records],
            [r.outcome for r in records],
            ids=None if all(v is None for v in ids) else ["" if v is None else v for v in ids],
            groups=None if all(v is None for v in groups) else ["" if v is None else v for v in groups],
        )

    # -- basic views -------------------------------------------------

    @property
    def probabilities(self) -> np.ndarray:
        return self._p

    @property
    def outcomes(self) -> np.ndarray:
        return self._y

    @property
    def ids(self):
        return self._ids

    @property
    def groups(self):
        return self._groups

    def records(self):
        ids = self._ids or [None] * len(self)
        groups = self._groups or [None] * len(self)
        return tuple(
            PredictionRecord(float(p), int(y), i, g)
            for p, y, i, g in zip(self._p, self._y, ids, groups)
        )

    def __len__(self) -> int:
        return self._p.shape[0]

    def __iter__(self):
        return iter(self.records())

    def __eq__(self, other):
        if not isinstance(other, PredictionSample):
            return NotImplemented
        return (
            np.array_equal(self._p, other._p)
            and np.array_equal(self._y, other._y)
            and self._ids == other._ids
            and self._groups == other._groups
        )

    def __repr__(self):
        return (
            f"PredictionSample(n={len(self)}, events={self.n_events}, "
            f"prevalence={self.prevalence:.4f})"
        )

    # -- derived counts ----------------------------------------------

    @property
    def n(self) -> int:
        return len(self)

    @property
    def n_events(self) -> int:
        return int(self._y.sum())

    @property
    def n_nonevents(self) -> int:
        return self.n - self.n_events

    @property
    def prevalence(self) -> float:
        return self.n_events / self.n

    @property
    def prevalence_fraction(self) -> Fraction:
        # Exact form: float division does not always satisfy
        # (n_events / n) * n == n_events, this does.
        return Fraction(self.n_events, self.n)

    @property
    def has_boundary_probabilities(self) -> bool:
        return bool(((self._p == 0.0) | (self._p == 1.0)).any())

    # -- transforms ----------------------------------------------------

    def linear_predictor(self, clamp: float | None = None) -> np.ndarray:
        """Log-odds of the probabilities.

        Boundary probabilities have no finite log-odds; they are an
        error unless `clamp` gives an epsilon to pull them inside (0, 1).
        """
        p = self.clamped_probabilities(clamp)
        if clamp is None and self.has_boundary_probabilities:
            raise UndefinedMeasureError(
                "probabilities of exactly 0 or 1 present; "
                "requires clamping policy (pass clamp=epsilon)"
            )
        return logit(p)

    def clamped_probabilities(self, clamp: float | None = None) -> np.ndarray:
        if clamp is None:
            return self._p
        if not 0.0 < clamp < 0.5:
            raise ContractError(f"clamp epsilon must be in (0, 0.5), got {clamp!r}")
        return np.clip(self._p, clamp, 1.0 - clamp)

    def replace_probabilities(self, probabilities) -> "PredictionSample":
        return PredictionSample(probabilities, self._y, ids=self._ids, groups=self._groups)

    def subset(self, indices) -> "PredictionSample":
        idx = np.asarray(indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        ids = None if self._ids is None else [self._ids[i] for i in idx]
        groups = None if self._groups is None else [self._groups[i] for i in idx]
        return PredictionSample(self._p[idx], self._y[idx], ids=ids, groups=groups)

    def by_group(self) -> dict:
        if self._groups is None:
            raise ContractError("sample carries no group labels")
        out = {}
        garr = np.asarray(self._groups, dtype=object)
        for g in sorted(set(self._groups)):
            out[g] = self.subset(garr == g)
        return out

    # -- serialization -------------------------------------------------

    def to_csv(self, path, prob_col="probability", outcome_col="outcome",
               id_col="id", group_col="group"):
        """Write records such that re-ingesting restores them bit-exactly.

        Probabilities use repr, the shortest round-tripping decimal form.
        """
        cols = [prob_col, outcome_col]
        if self._ids is not None:
            cols.append(id_col)
        if self._groups is not None:
            cols.append(group_col)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i in range(len(self)):
                row = [repr(float(self._p[i])), int(self._y[i])]
                if self._ids is not None:
                    row.append(self._ids[i])
                if self._groups is not None:
                    row.append(self._groups[i])
                w.writerow(row)


def ingest_csv(path, prob_col, outcome_col, id_col=None, group_col=None) -> PredictionSample:
    """Load a prediction sample from a CSV file.

    Column names are caller-supplied; there is no assumed layout.
    Rejects missing columns, unparseable or out-of-range probabilities,
    outcomes other than the integers 0 and 1, and empty files.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyInputError(f"{path}: empty file")
        for col in filter(None, (prob_col, outcome_col, id_col, group_col)):
            if col not in reader.fieldnames:
                raise SchemaError(
                    f"{path}: column {col!r} not found "
                    f"(available: {', '.join(reader.fieldnames)})"
                )
        probs, outs, ids, groups = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            raw_p = (row.get(prob_col) or "").strip()
            raw_y = (row.get(outcome_col) or "").strip()
            if not raw_p or not raw_y:
                raise ValidationError("missing probability or outcome", row=lineno)
            try:
                p = float(raw_p)
            except ValueError:
                raise ValidationError(f"unparseable probability {raw_p!r}", row=lineno) from None
            if not math.isfinite(p) or not 0.0 <= p <= 1.0:
                raise ValidationError(f"probability out of [0, 1]: {raw_p}", row=lineno)
            if raw_y not in ("0", "1"):
                raise ValidationError(f"outcome must be 0 or 1, got {raw_y!r}", row=lineno)
            probs.append(p)
            outs.append(int(raw_y))
            if id_col is not None:
                ids.append(row[id_col])
            if group_col is not None:
                groups.append(row[group_col])
    if not probs:
        raise EmptyInputError(f"{path}: no data rows")
    return PredictionSample(
        probs, outs,
        ids=ids if id_col is not None else None,
        groups=groups if group_col is not None else None,
    )


@dataclass(frozen=True)
class ThresholdSpec:
    """Decision threshold, plus an optional band for partial ranking area.

    The classification rule everywhere in this package: predicted
    probability equal to or higher than the threshold means high risk.
    """

    t: float
    sensitivity_band: tuple[float, float] | None = None
    fpr_band: tuple[float, float] | None = None

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ContractError(f"threshold must be inside (0, 1), got {self.t!r}")
        for name in ("sensitivity_band", "fpr_band"):
            band = getattr(self, name)
            if band is None:
                continue
            lo, hi = band
            if not (0.0 <= lo <= 1.0 and 0.0 <= hi <= 1.0):
                raise ContractError(f"{name} bounds must lie in [0, 1]: {band!r}")
            if not lo < hi:
                raise ContractError(f"{name} is empty: {band!r}")


@dataclass(frozen=True)
class CostSpec:
    """Misclassification costs: a missed event and a false alarm.

    `normalized` declares the two costs sum to one, which puts expected
    cost on the [0, 1] scale used for cost curves.
    """

    cost_fn: float
    cost_fp: float
    normalized: bool = False

    def __post_init__(self):
        if self.cost_fn < 0 or self.cost_fp < 0 or self.cost_fn + self.cost_fp == 0:
            raise ContractError(f"costs must be nonnegative and not both zero: {self!r}")
        if self.normalized and abs(self.cost_fn + self.cost_fp - 1.0) > 1e-12:
            raise ContractError("normalized costs must sum to 1")

    def normalize(self) -> "CostSpec":
        s = self.cost_fn + self.cost_fp
        return CostSpec(self.cost_fn / s, self.cost_fp / s, normalized=True)


@dataclass(frozen=True)
class MeasureVerdict:
    """Outcome of asking whether a measure can be computed on a sample."""

    measure: str
    computable: bool
    reason: str | None = None


# Measures that need the log-odds of the predictions, hence p in (0, 1).
_NEEDS_LOGODDS = frozenset({
    "loglikelihood", "logloss", "mcfadden_r2", "coxsnell_r2", "nagelkerke_r2",
    "calibration_intercept", "calibration_slope",
})
# Measures that do not exist when only one outcome class is present.
_NEEDS_BOTH_CLASSES = frozenset({
    "auroc", "average_precision", "partial_auroc", "discrimination_slope",
    "scaled_brier", "mcfadden_r2", "coxsnell_r2", "nagelkerke_r2",
    "calibration_intercept", "calibration_slope", "balanced_accuracy",
    "youden", "standardized_net_benefit",
})


def validate_for_measure(sample: PredictionSample, measure: str) -> MeasureVerdict:
    """Decide, from class counts and probability support alone, whether
    a measure is defined for this sample, and if not, why."""
    if measure in _NEEDS_BOTH_CLASSES and (
        sample.n_events == 0 or sample.n_nonevents == 0
    ):
        return MeasureVerdict(measure, False, "requires both outcome classes")
    if measure in _NEEDS_LOGODDS and sample.has_boundary_probabilities:
        return MeasureVerdict(measure, False, "requires clamping policy")
    if measure == "oe_ratio" and not (sample.probabilities > 0).any():
        return MeasureVerdict(measure, False, "expected event count is zero")
    return MeasureVerdict(measure, True)
