import csv
from fractions import Fraction

import numpy as np
import pytest

from riskbench.data_model import (
    CostSpec,
    PredictionRecord,
    PredictionSample,
    ThresholdSpec,
    ingest_csv,
    validate_for_measure,
)
from riskbench.errors import (
    ContractError,
    EmptyInputError,
    SchemaError,
    UndefinedMeasureError,
    ValidationError,
)


class TestPredictionRecord:
    def test_valid(self):
        r = PredictionRecord(probability=0.4, outcome=1)
        assert r.probability == 0.4 and r.outcome == 1

    @pytest.mark.parametrize("p", [-0.1, 1.5, float("nan"), float("inf")])
    def test_bad_probability(self, p):
        with pytest.raises(ValidationError):
            PredictionRecord(probability=p, outcome=0)

    @pytest.mark.parametrize("y", [2, -1, 0.5])
    def test_bad_outcome(self, y):
        with pytest.raises(ValidationError):
            PredictionRecord(probability=0.5, outcome=y)

    def test_boundaries_allowed(self):
        PredictionRecord(probability=0.0, outcome=0)
        PredictionRecord(probability=1.0, outcome=1)


class TestPredictionSample:
    def test_basic_counts(self, d4):
        assert d4.n == 4
        assert d4.n_events == 2
        assert d4.n_nonevents == 2
        assert d4.prevalence == 0.5

    def test_prevalence_fraction_exact(self, random_sample):
        s = random_sample(3, n=97)
        f = s.prevalence_fraction
        assert f == Fraction(s.n_events, s.n)
        assert float(f) * s.n != 0 or s.n_events == 0

    def test_arrays_immutable(self, d4):
        with pytest.raises(ValueError):
            d4.probabilities[0] = 0.9
        with pytest.raises(ValueError):
            d4.outcomes[0] = 1.0

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            PredictionSample(probabilities=np.array([0.5]),
                             outcomes=np.array([1.0, 0.0]))

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            PredictionSample(probabilities=np.array([]), outcomes=np.array([]))

    def test_linear_predictor_boundary_needs_clamp(self):
        s = PredictionSample(probabilities=np.array([0.0, 0.5]),
                             outcomes=np.array([0.0, 1.0]))
        assert s.has_boundary_probabilities
        with pytest.raises(UndefinedMeasureError, match="clamp"):
            s.linear_predictor()
        lp = s.linear_predictor(clamp=1e-9)
        assert np.isfinite(lp).all()

    def test_clamp_validation(self, d4):
        with pytest.raises(ContractError):
            d4.clamped_probabilities(0.7)
        with pytest.raises(ContractError):
            d4.clamped_probabilities(0.0)

    def test_subset_bool_and_index(self, d4):
        sub = d4.subset(d4.outcomes == 1.0)
        assert sub.n == 2 and sub.n_events == 2
        sub2 = d4.subset(np.array([0, 3]))
        assert list(sub2.probabilities) == [0.2, 0.4]

    def test_by_group_sorted(self):
        s = PredictionSample(
            probabilities=np.array([0.1, 0.2, 0.3, 0.4]),
            outcomes=np.array([0.0, 1.0, 0.0, 1.0]),
            groups=("b", "a", "b", "a"),
        )
        parts = s.by_group()
        assert list(parts) == ["a", "b"]
        assert parts["a"].n == 2

    def test_replace_probabilities(self, d4):
        s2 = d4.replace_probabilities(np.array([0.3, 0.7, 0.9, 0.1]))
        assert s2.probabilities[0] == 0.3
        assert (s2.outcomes == d4.outcomes).all()
        assert d4.probabilities[0] == 0.2


class TestIngest:
    def _write(self, path, rows, header=("p", "y")):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)

    def test_round_trip_bit_exact(self, tmp_path, random_sample):
        s = random_sample(1, n=50)
        f = tmp_path / "s.csv"
        s.to_csv(f, prob_col="p", outcome_col="y")
        back = ingest_csv(f, prob_col="p", outcome_col="y")
        assert (back.probabilities == s.probabilities).all()
        assert (back.outcomes == s.outcomes).all()

    def test_missing_column(self, tmp_path):
        f = tmp_path / "x.csv"
        self._write(f, [[0.5, 1]])
        with pytest.raises(SchemaError, match="prob"):
            ingest_csv(f, prob_col="prob", outcome_col="y")

    def test_bad_probability_reports_line(self, tmp_path):
        f = tmp_path / "x.csv"
        self._write(f, [[0.5, 1], [1.7, 0]])
        with pytest.raises(ValidationError, match="row 3"):
            ingest_csv(f, prob_col="p", outcome_col="y")

    def test_strict_outcome_tokens(self, tmp_path):
        f = tmp_path / "x.csv"
        self._write(f, [[0.5, "yes"]])
        with pytest.raises(ValidationError):
            ingest_csv(f, prob_col="p", outcome_col="y")

    def test_empty_file(self, tmp_path):
        f = tmp_path / "x.csv"
        self._write(f, [])
        with pytest.raises(EmptyInputError):
            ingest_csv(f, prob_col="p", outcome_col="y")

    def test_id_and_group_columns(self, tmp_path):
        f = tmp_path / "x.csv"
        self._write(f, [["r1", 0.5, 1, "g1"], ["r2", 0.2, 0, "g2"]],
                    header=("id", "p", "y", "g"))
        s = ingest_csv(f, prob_col="p", outcome_col="y",
                       id_col="id", group_col="g")
        assert s.ids == ("r1", "r2")
        assert s.groups == ("g1", "g2")


class TestSpecs:
    def test_threshold_bounds(self):
        with pytest.raises(ContractError):
            ThresholdSpec(t=0.0)
        with pytest.raises(ContractError):
            ThresholdSpec(t=1.0)
        assert ThresholdSpec(t=0.25).t == 0.25

    def test_band_ordering(self):
        with pytest.raises(ContractError):
            ThresholdSpec(t=0.5, sensitivity_band=(0.9, 0.8))

    def test_cost_spec(self):
        c = CostSpec(cost_fn=9.0, cost_fp=1.0)
        n = c.normalize()
        assert n.cost_fn == 0.9 and n.cost_fp == pytest.approx(0.1)
        with pytest.raises(ContractError):
            CostSpec(cost_fn=-1.0, cost_fp=1.0)
        with pytest.raises(ContractError):
            CostSpec(cost_fn=0.0, cost_fp=0.0)


class TestMeasureValidation:
    def test_ok_sample_any_measure(self, d4):
        for m in ("auroc", "brier", "calibration_slope", "net_benefit"):
            assert validate_for_measure(d4, m).computable

    def test_single_class(self):
        s = PredictionSample(probabilities=np.array([0.2, 0.4]),
                             outcomes=np.array([1.0, 1.0]))
        v = validate_for_measure(s, "auroc")
        assert not v.computable and "both outcome classes" in v.reason

    def test_boundary_log_family(self):
        s = PredictionSample(probabilities=np.array([0.0, 0.4]),
                             outcomes=np.array([0.0, 1.0]))
        v = validate_for_measure(s, "loglikelihood")
        assert not v.computable and "clamp" in v.reason
        assert validate_for_measure(s, "brier").computable
