"""Evaluation toolkit for risk prediction models with binary outcomes.

Thirty-two performance measures across five domains (discrimination,
calibration, overall, classification, clinical utility), logistic
recalibration, percentile bootstrap intervals, deterministic CSV/SVG
curve artifacts, and two reproducible simulation studies.
"""

from .calibration import (
    LogisticRecalibration,
    SmootherSettings,
    calibration_summaries,
    fit_calibration_intercept,
    fit_calibration_slope,
    grouped_calibration,
    oe_ratio,
    recalibrate,
    smoothed_calibration,
)
from .data_model import (
    CostSpec,
    PredictionRecord,
    PredictionSample,
    ThresholdSpec,
    ingest_csv,
)
from .errors import (
    BootstrapRefusedError,
    ComputationError,
    ContractError,
    ConvergenceError,
    EmptyInputError,
    InputError,
    RiskbenchError,
    SchemaError,
    SeparationError,
    SingularModelError,
    UndefinedMeasureError,
    ValidationError,
)
from .metrics import (
    ConfusionCounts,
    MetricEstimate,
    auroc,
    average_precision,
    classification_from_cells,
    confusion_at_threshold,
    expected_cost,
    min_expected_cost,
    net_benefit,
    overall_measures,
    partial_auroc,
    summary_classification,
)
from .registry import DOMAINS, MEASURES, evaluate_measure
from .resampling import BootstrapSpec, bootstrap_ci
from .simlab import (
    GridSpec,
    SimulationSpec,
    run_classification_grid,
    run_properness_study,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapRefusedError",
    "BootstrapSpec",
    "ComputationError",
    "ConfusionCounts",
    "ContractError",
    "ConvergenceError",
    "CostSpec",
    "DOMAINS",
    "EmptyInputError",
    "GridSpec",
    "InputError",
    "LogisticRecalibration",
    "MEASURES",
    "MetricEstimate",
    "PredictionRecord",
    "PredictionSample",
    "RiskbenchError",
    "SchemaError",
    "SeparationError",
    "SimulationSpec",
    "SingularModelError",
    "SmootherSettings",
    "ThresholdSpec",
    "UndefinedMeasureError",
    "ValidationError",
    "auroc",
    "average_precision",
    "bootstrap_ci",
    "calibration_summaries",
    "classification_from_cells",
    "confusion_at_threshold",
    "evaluate_measure",
    "expected_cost",
    "fit_calibration_intercept",
    "fit_calibration_slope",
    "grouped_calibration",
    "ingest_csv",
    "min_expected_cost",
    "net_benefit",
    "oe_ratio",
    "overall_measures",
    "partial_auroc",
    "recalibrate",
    "run_classification_grid",
    "run_properness_study",
    "smoothed_calibration",
    "summary_classification",
    "__version__",
]
