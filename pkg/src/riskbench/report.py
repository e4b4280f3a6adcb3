"""Assembles measure panels, reports and file artifacts.

Output rules that keep runs reproducible byte for byte: floats are
serialized by repr (CSV) or by the JSON encoder's shortest form, maps
are emitted with sorted keys, and nothing here reads clocks or global
random state. Nonfinite values are encoded as the strings "nan",
"inf" and "-inf" so the JSON stays standard.
"""

from __future__ import annotations

import json
import math
import pathlib

from . import calibration, curves, metrics, registry
from .data_model import CostSpec, PredictionSample, validate_for_measure
from .errors import ComputationError, ContractError
from .metrics import MetricEstimate
from .resampling import BootstrapSpec, bootstrap_ci

UTILITY_CI_NOTE = (
    "interval reported on request; whether utility measures should carry "
    "confidence intervals is debated in decision-analytic practice"
)


def default_costs(threshold: float) -> CostSpec:
    """Costs implied by a decision threshold: treating at probability t
    values a false alarm at t and a missed event at 1 - t (normalized),
    a 9:1 miss-to-false-alarm ratio at t = 0.1."""
    return CostSpec(cost_fn=1.0 - threshold, cost_fp=threshold, normalized=True)


def _json_value(v):
    if v is None:
        return None
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def _estimate_block(info: registry.MeasureInfo, est: MetricEstimate) -> dict:
    block = {"label": info.label, "value": _json_value(est.value)}
    block.update(info.tags())
    if est.ci is not None:
        block["ci"] = {
            "lower": _json_value(est.ci.lower),
            "upper": _json_value(est.ci.upper),
            "level": est.ci.level,
            "replicates": est.ci.replicates,
            "seed": est.ci.seed,
            "dropped": est.ci.dropped,
        }
        if info.domain == "clinical_utility":
            block["ci_note"] = UTILITY_CI_NOTE
    return block


def measure_panel(sample: PredictionSample, *, threshold: float,
                  costs: CostSpec | None = None, band=None,
                  clamp: float | None = None, groups: int = 10,
                  settings: calibration.SmootherSettings | None = None,
                  boot: BootstrapSpec | None = None, threads: int = 1,
                  measure_ids=None) -> tuple[dict, dict]:
    """Evaluate measures and return (blocks, skipped).

    blocks maps measure id to a serializable result block; skipped maps
    measure id to the reason it could not be computed.
    """
    if costs is None:
        costs = default_costs(threshold)
    ids = list(measure_ids) if measure_ids else list(registry.MEASURES)
    blocks, skipped = {}, {}
    for mid in ids:
        info = registry.MEASURES.get(mid)
        if info is None:
            raise ContractError(f"unknown measure {mid!r}")
        verdict = validate_for_measure(sample, mid)
        if not verdict.computable and clamp is None:
            skipped[mid] = verdict.reason
            continue
        fn = registry.resolve(
            mid, threshold=threshold, costs=costs, clamp=clamp,
            groups=groups, settings=settings, band=band,
        )
        try:
            if boot is not None:
                est = bootstrap_ci(sample, fn, boot, threads=threads, name=mid)
            else:
                est = MetricEstimate(name=mid, value=float(fn(sample)))
        except ComputationError as exc:
            skipped[mid] = str(exc)
            continue
        blocks[mid] = _estimate_block(info, est)
    return blocks, skipped


def _grouped_by_domain(blocks: dict) -> dict:
    out = {d: {} for d in registry.DOMAINS}
    for mid, block in blocks.items():
        out[registry.MEASURES[mid].domain][mid] = block
    return {d: v for d, v in out.items() if v}


def evaluation_report(sample: PredictionSample, *, threshold: float,
                      costs: CostSpec | None = None, band=None,
                      clamp: float | None = None, groups: int = 10,
                      settings: calibration.SmootherSettings | None = None,
                      boot: BootstrapSpec | None = None, threads: int = 1,
                      config_echo: dict | None = None) -> dict:
    """Full evaluation as a JSON-ready dict."""
    if costs is None:
        costs = default_costs(threshold)
    blocks, skipped = measure_panel(
        sample, threshold=threshold, costs=costs, band=band, clamp=clamp,
        groups=groups, settings=settings, boot=boot, threads=threads,
    )
    report = {
        "sample": {
            "n": sample.n,
            "n_events": sample.n_events,
            "n_nonevents": sample.n_nonevents,
            "prevalence": sample.prevalence,
        },
        "config": {
            "threshold": threshold,
            "costs": [costs.cost_fn, costs.cost_fp],
            "pauroc_band": list(band) if band else list(registry.DEFAULT_SENSITIVITY_BAND),
            "clamp": clamp,
            "groups": groups,
            "span": (settings or calibration.SmootherSettings()).span,
            "bootstrap": None if boot is None else {
                "replicates": boot.replicates, "level": boot.level,
                "seed": boot.master_seed, "stratified": boot.stratified,
            },
            **(config_echo or {}),
        },
        "measures": _grouped_by_domain(blocks),
        "skipped": skipped,
    }
    return report


def comparison_report(sample_a: PredictionSample, sample_b: PredictionSample,
                      labels=("a", "b"), **panel_kw) -> dict:
    """Side-by-side panels for two models on the same outcomes, with
    per-measure deltas and, for strictly proper measures, which model
    the measure genuinely favors."""
    if not (sample_a.outcomes == sample_b.outcomes).all():
        raise ContractError("comparison requires identical outcomes")
    blocks_a, skipped_a = measure_panel(sample_a, **panel_kw)
    blocks_b, skipped_b = measure_panel(sample_b, **panel_kw)
    deltas, favored = {}, {}
    for mid in blocks_a:
        if mid not in blocks_b:
            continue
        va, vb = blocks_a[mid]["value"], blocks_b[mid]["value"]
        if not (isinstance(va, float) and isinstance(vb, float)):
            continue
        deltas[mid] = _json_value(vb - va)
        info = registry.MEASURES[mid]
        if info.properness != registry.STRICTLY_PROPER:
            continue
        if info.orientation == "higher":
            better = labels[1] if vb > va else labels[0] if va > vb else "tie"
        elif info.orientation == "lower":
            better = labels[1] if vb < va else labels[0] if va < vb else "tie"
        else:
            da, db = abs(va - info.ideal), abs(vb - info.ideal)
            better = labels[1] if db < da else labels[0] if da < db else "tie"
        favored[mid] = better
    return {
        "labels": list(labels),
        "panels": {labels[0]: _grouped_by_domain(blocks_a),
                   labels[1]: _grouped_by_domain(blocks_b)},
        "skipped": {labels[0]: skipped_a, labels[1]: skipped_b},
        "delta": deltas,
        "strictly_proper_favor": favored,
        "note": ("improper and semi-proper measures can favor a worse model; "
                 "comparisons rest on the strictly proper rows"),
    }


def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


CURVE_KINDS = ("roc", "pr", "calibration", "classification", "decision",
               "cost", "density")


def write_curve_artifacts(sample: PredictionSample, outdir, *,
                          kinds=CURVE_KINDS, threshold: float | None = None,
                          dca_range=None, dca_step: float = 0.01,
                          dca_smooth: int | None = None,
                          class_pair=("sensitivity", "specificity"),
                          groups: int = 10,
                          settings: calibration.SmootherSettings | None = None,
                          band_replicates: int = 0, band_seed: int = 0,
                          svg: bool = True) -> dict:
    """Write CSV (and SVG) files for the requested curve kinds.

    Returns a manifest mapping kind to the files written. Kinds whose
    preconditions fail (single-class data, too few records for the
    smoother) are reported in the manifest under "skipped" instead of
    aborting the rest.
    """
    outdir = pathlib.Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest, skipped = {}, {}

    def emit(kind, series, stem):
        files = []
        csv_path = outdir / f"{stem}.csv"
        series.to_csv(csv_path)
        files.append(csv_path.name)
        if svg:
            svg_path = outdir / f"{stem}.svg"
            series.to_svg(svg_path)
            files.append(svg_path.name)
        manifest[kind] = manifest.get(kind, []) + files

    for kind in kinds:
        try:
            if kind == "roc":
                emit(kind, curves.roc_curve(sample), "roc")
            elif kind == "pr":
                emit(kind, curves.pr_curve(sample), "pr")
            elif kind == "classification":
                emit(kind, curves.classification_plot(sample, class_pair),
                     "classification")
            elif kind == "decision":
                if dca_range is None:
                    # the relevant threshold range is a clinical judgment;
                    # it is never inferred from the data
                    skipped[kind] = ("decision curve needs an explicit "
                                     "threshold range")
                    continue
                emit(kind, curves.decision_curve(
                    sample, dca_range[0], dca_range[1], step=dca_step,
                    smooth_window=dca_smooth), "decision")
            elif kind == "cost":
                emit(kind, curves.cost_curve(sample), "cost")
            elif kind == "density":
                emit(kind, curves.risk_distribution(sample), "risk_density")
            elif kind == "calibration":
                gc = calibration.grouped_calibration(sample, groups)
                emit(kind, curves.calibration_series(gc), "calibration_grouped")
                sc = calibration.smoothed_calibration(
                    sample, settings, band_replicates=band_replicates,
                    band_seed=band_seed)
                emit(kind, curves.calibration_series(sc), "calibration_smoothed")
            else:
                raise ContractError(f"unknown curve kind {kind!r}")
        except ComputationError as exc:
            skipped[kind] = str(exc)
    if skipped:
        manifest["skipped"] = skipped
    return manifest


def subgroup_report(sample: PredictionSample, *, threshold: float,
                    costs: CostSpec | None = None, clamp: float | None = None,
                    min_size: int = calibration.MIN_SMOOTHER_N) -> dict:
    """Per-subgroup measure panels (no bootstrap) plus calibration
    curve availability; undersized subgroups are flagged, not dropped
    silently."""
    out = {"groups": {}, "flagged": {}}
    for label, part in sample.by_group().items():
        if len(part) < min_size:
            out["flagged"][label] = (
                f"{len(part)} records, below floor {min_size}; "
                "subgroup metrics would be unstable"
            )
            continue
        blocks, skipped = measure_panel(
            part, threshold=threshold, costs=costs, clamp=clamp,
            measure_ids=("auroc", "oe_ratio", "calibration_intercept",
                         "calibration_slope", "ici", "ece", "net_benefit"),
        )
        entry = {"n": len(part), "prevalence": part.prevalence,
                 "measures": {m: b["value"] for m, b in blocks.items()}}
        if skipped:
            entry["skipped"] = skipped
        out["groups"][label] = entry
    return out
