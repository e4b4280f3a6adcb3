"""Catalog of the 32 supported performance measures.

Each entry carries the measure's evaluation domain, its properness
grade (strictly proper / semi-proper / improper), whether its focus is
coherent (purely statistical or purely decision-analytic) or a mix,
a one-word-to-one-line guidance status, and how to compute it.

Improper measures are still computed on request, but any report built
from this catalog attaches their advisory status so a reader sees the
health warning next to the number.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import calibration, metrics
from .data_model import CostSpec, PredictionSample
from .errors import ContractError

STRICTLY_PROPER = "++"
SEMI_PROPER = "+"
IMPROPER = "-"

PROPERNESS_LABELS = {
    STRICTLY_PROPER: "strictly proper",
    SEMI_PROPER: "semi-proper",
    IMPROPER: "improper",
}

G_RECOMMENDED = "Recommended"
G_INADVISABLE = "Inadvisable"
G_NEUTRAL = "Not inadvisable, but not essential either"
G_NEUTRAL_HERE = "Not inadvisable, but not essential either (in this work's context)"
G_DESCRIPTIVE = "Not essential, can be descriptive if both reported together"


@dataclass(frozen=True)
class MeasureInfo:
    id: str
    label: str
    domain: str
    properness: str
    focus: str
    guidance: str
    orientation: str  # "higher" | "lower" | "target"
    ideal: float | None = None
    needs_threshold: bool = False
    needs_costs: bool = False

    @property
    def improper(self) -> bool:
        return self.properness == IMPROPER

    def tags(self) -> dict:
        """Serializable annotation block for reports."""
        out = {
            "domain": self.domain,
            "properness": self.properness,
            "properness_label": PROPERNESS_LABELS[self.properness],
            "focus": self.focus,
            "guidance": self.guidance,
            "orientation": self.orientation,
        }
        if self.ideal is not None:
            out["ideal"] = self.ideal
        if self.improper:
            out["advisory"] = (
                f"{G_INADVISABLE}: improper measure; an incorrect model can "
                "score better than the correct one"
            )
        return out


def _m(*args, **kw):
    return MeasureInfo(*args, **kw)


_ALL = [
    # discrimination
    _m("auroc", "AUROC", "discrimination", SEMI_PROPER, "+", G_RECOMMENDED,
       "higher", 1.0),
    _m("average_precision", "Average precision (AUPRC)", "discrimination",
       SEMI_PROPER, "-", G_INADVISABLE, "higher", 1.0),
    _m("partial_auroc", "Partial AUROC", "discrimination", SEMI_PROPER, "-",
       G_INADVISABLE, "higher"),
    # calibration
    _m("oe_ratio", "O:E ratio", "calibration", SEMI_PROPER, "+", G_NEUTRAL,
       "target", 1.0),
    _m("calibration_intercept", "Calibration intercept", "calibration",
       SEMI_PROPER, "+", G_NEUTRAL, "target", 0.0),
    _m("calibration_slope", "Calibration slope", "calibration", SEMI_PROPER,
       "+", G_NEUTRAL, "target", 1.0),
    _m("eci", "Estimated calibration index", "calibration", STRICTLY_PROPER,
       "+", G_NEUTRAL, "lower", 0.0),
    _m("ici", "Integrated calibration index", "calibration", STRICTLY_PROPER,
       "+", G_NEUTRAL, "lower", 0.0),
    _m("ece", "Expected calibration error", "calibration", STRICTLY_PROPER,
       "+", G_NEUTRAL, "lower", 0.0),
    # overall
    _m("loglikelihood", "Log-likelihood", "overall", STRICTLY_PROPER, "+",
       G_NEUTRAL_HERE, "higher"),
    _m("logloss", "Logloss (cross-entropy)", "overall", STRICTLY_PROPER, "+",
       G_NEUTRAL_HERE, "lower", 0.0),
    _m("brier", "Brier score", "overall", STRICTLY_PROPER, "+",
       G_NEUTRAL_HERE, "lower", 0.0),
    _m("scaled_brier", "Scaled Brier score", "overall", STRICTLY_PROPER, "+",
       G_NEUTRAL_HERE, "higher", 1.0),
    _m("mcfadden_r2", "McFadden R-squared", "overall", STRICTLY_PROPER, "+",
       G_NEUTRAL_HERE, "higher", 1.0),
    _m("coxsnell_r2", "Cox-Snell R-squared", "overall", STRICTLY_PROPER, "+",
       G_NEUTRAL_HERE, "higher"),
    _m("nagelkerke_r2", "Nagelkerke R-squared", "overall", STRICTLY_PROPER,
       "+", G_NEUTRAL_HERE, "higher", 1.0),
    _m("discrimination_slope", "Discrimination slope", "overall", IMPROPER,
       "+", G_INADVISABLE, "higher"),
    _m("mape", "Mean absolute prediction error", "overall", IMPROPER, "+",
       G_INADVISABLE, "lower", 0.0),
    # classification, summary
    _m("accuracy", "Classification accuracy", "classification", IMPROPER, "+",
       G_INADVISABLE, "higher", 1.0, needs_threshold=True),
    _m("balanced_accuracy", "Balanced accuracy", "classification", IMPROPER,
       "+", G_INADVISABLE, "higher", 1.0, needs_threshold=True),
    _m("youden", "Youden index", "classification", IMPROPER, "+",
       G_INADVISABLE, "higher", 1.0, needs_threshold=True),
    _m("dor", "Diagnostic odds ratio", "classification", IMPROPER, "+",
       G_INADVISABLE, "higher", needs_threshold=True),
    _m("kappa", "Cohen's kappa", "classification", IMPROPER, "+",
       G_INADVISABLE, "higher", 1.0, needs_threshold=True),
    _m("f1", "F1 score", "classification", IMPROPER, "-", G_INADVISABLE,
       "higher", 1.0, needs_threshold=True),
    _m("mcc", "Matthews correlation coefficient", "classification", IMPROPER,
       "+", G_INADVISABLE, "higher", 1.0, needs_threshold=True),
    # classification, partial
    _m("sensitivity", "Sensitivity", "classification", IMPROPER, "+",
       G_DESCRIPTIVE, "higher", 1.0, needs_threshold=True),
    _m("specificity", "Specificity", "classification", IMPROPER, "+",
       G_DESCRIPTIVE, "higher", 1.0, needs_threshold=True),
    _m("ppv", "Positive predictive value", "classification", IMPROPER, "+",
       G_DESCRIPTIVE, "higher", 1.0, needs_threshold=True),
    _m("npv", "Negative predictive value", "classification", IMPROPER, "+",
       G_DESCRIPTIVE, "higher", 1.0, needs_threshold=True),
    # clinical utility
    _m("net_benefit", "Net benefit", "clinical_utility", SEMI_PROPER, "+",
       G_RECOMMENDED, "higher", needs_threshold=True),
    _m("standardized_net_benefit", "Standardized net benefit",
       "clinical_utility", SEMI_PROPER, "+", G_RECOMMENDED, "higher", 1.0,
       needs_threshold=True),
    _m("expected_cost", "Expected cost", "clinical_utility", SEMI_PROPER, "+",
       G_RECOMMENDED, "lower", needs_costs=True),
]

MEASURES: dict[str, MeasureInfo] = {m.id: m for m in _ALL}

DOMAINS = ("discrimination", "calibration", "overall", "classification",
           "clinical_utility")

_CLASSIFICATION_IDS = tuple(m.id for m in _ALL if m.domain == "classification")

DEFAULT_SENSITIVITY_BAND = (0.8, 1.0)


def resolve(measure_id: str, *, threshold: float | None = None,
            costs: CostSpec | None = None, clamp: float | None = None,
            groups: int = 10,
            settings: calibration.SmootherSettings | None = None,
            band=None, band_kind: str = "sensitivity"):
    """Build a callable sample -> float for one measure.

    Measures that need a threshold or costs insist on them here, at
    configuration time, rather than failing mid-computation.
    """
    info = MEASURES.get(measure_id)
    if info is None:
        raise ContractError(f"unknown measure {measure_id!r}")
    if info.needs_threshold and threshold is None:
        raise ContractError(f"measure {measure_id!r} needs a decision threshold")
    if info.needs_costs and costs is None:
        raise ContractError(f"measure {measure_id!r} needs misclassification costs")

    if measure_id == "auroc":
        return metrics.auroc
    if measure_id == "average_precision":
        return metrics.average_precision
    if measure_id == "partial_auroc":
        use_band = band if band is not None else DEFAULT_SENSITIVITY_BAND
        return lambda s: metrics.partial_auroc(s, use_band, kind=band_kind)
    if measure_id == "oe_ratio":
        return calibration.oe_ratio
    if measure_id == "calibration_intercept":
        return lambda s: calibration.fit_calibration_intercept(s, clamp)
    if measure_id == "calibration_slope":
        return lambda s: calibration.fit_calibration_slope(s, clamp).slope
    if measure_id == "ece":
        return lambda s: calibration.ece(s, groups=groups)
    if measure_id == "ici":
        return lambda s: calibration.ici(s, settings=settings)
    if measure_id == "eci":
        return lambda s: calibration.eci(s, settings=settings)
    if measure_id in metrics.OVERALL_KEYS:
        return lambda s: metrics.overall_measures(s, clamp)[measure_id]
    if measure_id in _CLASSIFICATION_IDS:
        def classify(s: PredictionSample) -> float:
            counts = metrics.confusion_at_threshold(s, threshold)
            return metrics.classification_from_cells(
                counts.tp, counts.fp, counts.tn, counts.fn
            )[measure_id]
        return classify
    if measure_id in ("net_benefit", "standardized_net_benefit"):
        def utility(s: PredictionSample) -> float:
            counts = metrics.confusion_at_threshold(s, threshold)
            return metrics.net_benefit(counts)[measure_id]
        return utility
    if measure_id == "expected_cost":
        if threshold is not None:
            return lambda s: metrics.expected_cost(
                metrics.confusion_at_threshold(s, threshold), costs
            )
        return lambda s: metrics.min_expected_cost(s, costs).ec_min
    raise ContractError(f"no implementation wired for {measure_id!r}")


def evaluate_measure(sample: PredictionSample, measure_id: str, **kw) -> float:
    return resolve(measure_id, **kw)(sample)
