"""Command line front end.

Subcommands: evaluate, recalibrate, compare, curves, simulate, grid.
Exit codes: 0 success, 2 input or configuration problems (argparse
usage errors included), 3 a requested computation does not exist for
the data.

Seeds: --seed (or the RISKBENCH_SEED environment variable) feeds every
random element; --threads never changes any output byte.
"""

from __future__ import annotations

import argparse
import os
import pathlib
import sys

from . import report as report_mod
from .calibration import SmootherSettings, recalibrate
from .data_model import DEFAULT_CLAMP, CostSpec, ingest_csv
from .errors import ComputationError, InputError, RiskbenchError
from .resampling import BootstrapSpec
from .simlab import (
    GridSpec,
    SimulationSpec,
    run_classification_grid,
    run_properness_study,
)


def _pair(text: str, what: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"{what} must look like LO:HI, got {text!r}"
        ) from None


def _range_pair(text: str) -> tuple[float, float]:
    return _pair(text, "range")


def _cost_pair(text: str) -> tuple[float, float]:
    return _pair(text, "costs")


def _class_pair(text: str) -> tuple[str, str]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"expected MEASURE:MEASURE, got {text!r}"
        )
    return parts[0], parts[1]


def _env_seed() -> int:
    raw = os.environ.get("RISKBENCH_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(
            f"RISKBENCH_SEED must be an integer, got {raw!r}"
        ) from None


def _add_io(p, prob_col=True):
    p.add_argument("--input", required=True, help="CSV file of predictions")
    if prob_col:
        p.add_argument("--prob-col", required=True,
                       help="column holding predicted probabilities")
    p.add_argument("--outcome-col", required=True,
                   help="column holding 0/1 outcomes")
    p.add_argument("--id-col", default=None)
    p.add_argument("--group-col", default=None)


def _add_out(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: RISKBENCH_SEED or 0)")
    p.add_argument("--no-svg", action="store_true",
                   help="write CSV artifacts only")


def _add_eval_opts(p):
    p.add_argument("--threshold", type=float, required=True,
                   help="decision threshold; probabilities at or above it "
                        "are classified high risk")
    p.add_argument("--costs", type=_cost_pair, default=None, metavar="FN:FP",
                   help="misclassification costs (default implied by the "
                        "threshold)")
    p.add_argument("--pauroc-band", type=_range_pair, default=(0.8, 1.0),
                   metavar="LO:HI", help="sensitivity band for partial AUROC")
    p.add_argument("--clamp", type=float, nargs="?", const=DEFAULT_CLAMP,
                   default=None, metavar="EPS",
                   help="pull probabilities of exactly 0/1 inside (0,1) by "
                        f"EPS (default {DEFAULT_CLAMP} when flag given bare)")
    p.add_argument("--groups", type=int, default=10,
                   help="groups for the grouped calibration curve and ECE")
    p.add_argument("--span", type=float, default=0.75,
                   help="smoother span for the smoothed calibration curve")
    p.add_argument("--boot-reps", type=int, default=0,
                   help="bootstrap replicates for confidence intervals "
                        "(0 disables)")
    p.add_argument("--boot-seed", type=int, default=None,
                   help="bootstrap master seed (default: --seed)")
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--stratified", action="store_true",
                   help="resample events and non-events separately")


def _add_curve_opts(p, require_dca: bool):
    p.add_argument("--dca-range", type=_range_pair, metavar="LO:HI",
                   required=require_dca,
                   help="clinically relevant threshold range for the "
                        "decision curve (mandatory; never inferred)")
    p.add_argument("--dca-step", type=float, default=0.01)
    p.add_argument("--dca-smooth", type=int, default=None, metavar="W",
                   help="odd moving-average window for the decision curve")
    p.add_argument("--class-pair", type=_class_pair,
                   default=("sensitivity", "specificity"), metavar="M1:M2",
                   help="measures for the threshold-sweep plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskbench",
        description="Evaluation toolkit for binary-outcome risk predictions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="full measure panel plus curve artifacts")
    _add_io(p)
    _add_out(p)
    _add_eval_opts(p)
    _add_curve_opts(p, require_dca=True)
    p.add_argument("--recalibrate", action="store_true",
                   help="also fit, apply and re-evaluate a logistic "
                        "recalibration")
    p.add_argument("--subgroups", action="store_true",
                   help="per-subgroup panel (needs --group-col)")

    p = sub.add_parser("recalibrate", help="fit and apply logistic recalibration")
    _add_io(p)
    _add_out(p)
    p.add_argument("--clamp", type=float, nargs="?", const=DEFAULT_CLAMP,
                   default=None, metavar="EPS")

    p = sub.add_parser("compare", help="two prediction columns, same outcomes")
    _add_io(p, prob_col=False)
    p.add_argument("--prob-col-a", required=True)
    p.add_argument("--prob-col-b", required=True)
    _add_out(p)
    _add_eval_opts(p)

    p = sub.add_parser("curves", help="curve artifacts only")
    _add_io(p)
    _add_out(p)
    p.add_argument("--kinds", default=",".join(report_mod.CURVE_KINDS),
                   help="comma-separated curve kinds "
                        f"(default: {','.join(report_mod.CURVE_KINDS)})")
    p.add_argument("--groups", type=int, default=10)
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--band-reps", type=int, default=0,
                   help="bootstrap band replicates for the smoothed "
                        "calibration curve")
    _add_curve_opts(p, require_dca=False)

    p = sub.add_parser("simulate", help="simulation studies")
    sim_sub = p.add_subparsers(dest="study", required=True)
    ps = sim_sub.add_parser("properness",
                            help="score distorted model variants against the truth")
    _add_out(ps)
    ps.add_argument("--datasets", type=int, default=2000)
    ps.add_argument("--size", type=int, default=1000)
    ps.add_argument("--threshold", type=float, default=0.1)
    ps.add_argument("--variants", default=None,
                    help="comma-separated variant ids (default: all 11)")
    ps.add_argument("--literal-square", action="store_true",
                    help="use the literal squared linear predictor for "
                         "variants 5 and 6 instead of log-odds doubling")
    ps.add_argument("--piecewise-factor", type=float, default=0.1,
                    help="shrink/blow-up multiplier for variants 7-9 "
                         "(0.2 reproduces the published mean tables)")

    p = sub.add_parser("grid", help="classification measure lattice study")
    _add_out(p)
    p.add_argument("--min-bar", type=float, default=0.5,
                   help="balanced-accuracy floor for retained combinations")
    p.add_argument("--no-filter", action="store_true",
                   help="keep all lattice combinations")
    return parser


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _env_seed()


def _boot_spec(args, seed: int) -> BootstrapSpec | None:
    if not args.boot_reps:
        return None
    return BootstrapSpec(
        replicates=args.boot_reps, level=args.ci_level,
        master_seed=args.boot_seed if args.boot_seed is not None else seed,
        stratified=args.stratified,
    )


def _load(args, prob_col=None):
    return ingest_csv(
        args.input, prob_col=prob_col or args.prob_col,
        outcome_col=args.outcome_col, id_col=args.id_col,
        group_col=args.group_col,
    )


def _costs(args) -> CostSpec | None:
    if args.costs is None:
        return None
    return CostSpec(cost_fn=args.costs[0], cost_fp=args.costs[1])


def _cmd_evaluate(args) -> int:
    seed = _resolve_seed(args)
    sample = _load(args)
    boot = _boot_spec(args, seed)
    settings = SmootherSettings(span=args.span)
    costs = _costs(args)
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    manifest = report_mod.write_curve_artifacts(
        sample, outdir, threshold=args.threshold, dca_range=args.dca_range,
        dca_step=args.dca_step, dca_smooth=args.dca_smooth,
        class_pair=args.class_pair, groups=args.groups, settings=settings,
        band_replicates=boot.replicates if boot else 0, band_seed=seed,
        svg=not args.no_svg,
    )
    rep = report_mod.evaluation_report(
        sample, threshold=args.threshold, costs=costs, band=args.pauroc_band,
        clamp=args.clamp, groups=args.groups, settings=settings, boot=boot,
        threads=args.threads,
        config_echo={"input": args.input, "seed": seed,
                     "dca_range": list(args.dca_range),
                     "dca_step": args.dca_step},
    )
    rep["artifacts"] = manifest
    if args.subgroups:
        if sample.groups is None:
            raise InputError("--subgroups needs --group-col")
        rep["subgroups"] = report_mod.subgroup_report(
            sample, threshold=args.threshold, costs=costs, clamp=args.clamp)
    if args.recalibrate:
        fit, rs = recalibrate(sample, args.clamp)
        sub = outdir / "recalibrated"
        sub.mkdir(exist_ok=True)
        rs.to_csv(sub / "recalibrated.csv", prob_col=args.prob_col,
                  outcome_col=args.outcome_col)
        report_mod.write_json(sub / "recalibration.json",
                              {"intercept": fit.intercept, "slope": fit.slope})
        rep_after = report_mod.evaluation_report(
            rs, threshold=args.threshold, costs=costs, band=args.pauroc_band,
            clamp=args.clamp, groups=args.groups, settings=settings,
            boot=boot, threads=args.threads,
            config_echo={"input": args.input, "seed": seed,
                         "recalibrated": True},
        )
        rep_after["artifacts"] = report_mod.write_curve_artifacts(
            rs, sub, kinds=("calibration",), groups=args.groups,
            settings=settings,
            band_replicates=boot.replicates if boot else 0, band_seed=seed,
            svg=not args.no_svg,
        )
        report_mod.write_json(sub / "report.json", rep_after)
    report_mod.write_json(outdir / "report.json", rep)
    print(f"evaluated {sample.n} records; wrote {outdir / 'report.json'}")
    return 0


def _cmd_recalibrate(args) -> int:
    sample = _load(args)
    fit, rs = recalibrate(sample, args.clamp)
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rs.to_csv(outdir / "recalibrated.csv", prob_col=args.prob_col,
              outcome_col=args.outcome_col)
    report_mod.write_json(outdir / "recalibration.json",
                          {"intercept": fit.intercept, "slope": fit.slope})
    print(f"intercept {fit.intercept:.6f}, slope {fit.slope:.6f}; "
          f"wrote {outdir / 'recalibrated.csv'}")
    return 0


def _cmd_compare(args) -> int:
    seed = _resolve_seed(args)
    sample_a = _load(args, prob_col=args.prob_col_a)
    sample_b = _load(args, prob_col=args.prob_col_b)
    boot = _boot_spec(args, seed)
    rep = report_mod.comparison_report(
        sample_a, sample_b, labels=(args.prob_col_a, args.prob_col_b),
        threshold=args.threshold, costs=_costs(args), band=args.pauroc_band,
        clamp=args.clamp, boot=boot, threads=args.threads,
    )
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    report_mod.write_json(outdir / "compare.json", rep)
    print(f"wrote {outdir / 'compare.json'}")
    return 0


def _cmd_curves(args) -> int:
    seed = _resolve_seed(args)
    sample = _load(args)
    kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
    manifest = report_mod.write_curve_artifacts(
        sample, args.out, kinds=kinds, dca_range=args.dca_range,
        dca_step=args.dca_step, dca_smooth=args.dca_smooth,
        class_pair=args.class_pair, groups=args.groups,
        settings=SmootherSettings(span=args.span),
        band_replicates=args.band_reps, band_seed=seed, svg=not args.no_svg,
    )
    report_mod.write_json(pathlib.Path(args.out) / "manifest.json", manifest)
    print(f"wrote {len(manifest)} artifact groups to {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    variants = tuple(range(1, 12))
    if args.variants:
        variants = tuple(int(v) for v in args.variants.split(","))
    spec = SimulationSpec(
        n_datasets=args.datasets, n_per_dataset=args.size,
        threshold=args.threshold, master_seed=seed, variants=variants,
        literal_square=args.literal_square,
        piecewise_factor=args.piecewise_factor,
    )
    result = run_properness_study(spec, threads=args.threads)
    result.write_csvs(args.out)
    print(f"simulated {spec.n_datasets} datasets x {len(variants)} variants; "
          f"wrote {args.out}")
    return 0


def _cmd_grid(args) -> int:
    spec = GridSpec(
        min_balanced_accuracy=None if args.no_filter else args.min_bar,
    )
    result = run_classification_grid(spec)
    result.write_csvs(args.out)
    print(f"{result.n_combinations} combinations ({result.n_pairs} "
          f"sensitivity/specificity pairs); wrote {args.out}")
    return 0


_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "recalibrate": _cmd_recalibrate,
    "compare": _cmd_compare,
    "curves": _cmd_curves,
    "grid": _cmd_grid,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"riskbench: input error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"riskbench: cannot compute: {exc}", file=sys.stderr)
        return 3
    except RiskbenchError as exc:
        print(f"riskbench: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"riskbench: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
