import math

import numpy as np
import pytest

from riskbench.data_model import PredictionSample
from riskbench.errors import (
    BootstrapRefusedError,
    ContractError,
    UndefinedMeasureError,
)
from riskbench.metrics import BootstrapCI, auroc
from riskbench.resampling import (
    BootstrapSpec,
    bootstrap_ci,
    resample_indices,
    substream,
)
from conftest import make_sample


class TestSubstream:
    def test_same_path_same_draws(self):
        a = substream(7, 3).integers(0, 1000, size=20)
        b = substream(7, 3).integers(0, 1000, size=20)
        np.testing.assert_array_equal(a, b)

    def test_paths_are_independent_keys(self):
        a = substream(7, 3).integers(0, 1000, size=20)
        b = substream(7, 4).integers(0, 1000, size=20)
        c = substream(8, 3).integers(0, 1000, size=20)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_deep_paths(self):
        a = substream(0, 1, 2).random(4)
        b = substream(0, 1, 2).random(4)
        np.testing.assert_array_equal(a, b)


class TestResampleIndices:
    def test_plain_size(self):
        s = make_sample(1, n=50)
        idx = resample_indices(substream(0, 0), s)
        assert idx.shape == (50,)
        assert idx.min() >= 0 and idx.max() < 50

    def test_stratified_preserves_class_counts(self):
        s = make_sample(2, n=80)
        for r in range(10):
            idx = resample_indices(substream(3, r), s, stratified=True)
            boot = s.subset(idx)
            assert boot.n_events == s.n_events
            assert boot.n_nonevents == s.n_nonevents


class TestSpecValidation:
    def test_bounds(self):
        with pytest.raises(ContractError):
            BootstrapSpec(replicates=0)
        with pytest.raises(ContractError):
            BootstrapSpec(level=1.0)
        with pytest.raises(ContractError):
            BootstrapSpec(master_seed=-1)

    def test_ci_ordering(self):
        with pytest.raises(ContractError):
            BootstrapCI(lower=0.7, upper=0.3, level=0.95,
                        replicates=10, seed=0)


class TestBootstrapCI:
    def test_quantiles_are_type7(self):
        # feed the engine replicate values 1..5 through a call counter
        s = make_sample(4, n=30)
        calls = iter(range(6))

        def staged(_):
            return float(next(calls))

        est = bootstrap_ci(s, staged, BootstrapSpec(replicates=5, level=0.95))
        assert est.value == 0.0
        assert est.ci.lower == pytest.approx(1.1, abs=1e-12)
        assert est.ci.upper == pytest.approx(4.9, abs=1e-12)

    def test_deterministic_given_seed(self):
        s = make_sample(9, n=60)
        spec = BootstrapSpec(replicates=200, master_seed=11)
        a = bootstrap_ci(s, auroc, spec)
        b = bootstrap_ci(s, auroc, spec)
        assert (a.ci.lower, a.ci.upper) == (b.ci.lower, b.ci.upper)

    def test_seed_changes_interval(self):
        s = make_sample(9, n=60)
        a = bootstrap_ci(s, auroc, BootstrapSpec(replicates=200, master_seed=11))
        b = bootstrap_ci(s, auroc, BootstrapSpec(replicates=200, master_seed=12))
        assert (a.ci.lower, a.ci.upper) != (b.ci.lower, b.ci.upper)

    def test_thread_count_does_not_change_result(self):
        s = make_sample(14, n=80)
        spec = BootstrapSpec(replicates=150, master_seed=5)
        one = bootstrap_ci(s, auroc, spec, threads=1)
        four = bootstrap_ci(s, auroc, spec, threads=4)
        assert one.ci.lower == four.ci.lower
        assert one.ci.upper == four.ci.upper
        assert one.ci.dropped == four.ci.dropped

    def test_point_estimate_is_full_sample(self):
        s = make_sample(21, n=90)
        est = bootstrap_ci(s, auroc, BootstrapSpec(replicates=50))
        assert est.value == auroc(s)
        assert est.ci.replicates == 50

    def test_stratified_keeps_rare_class(self):
        p = np.concatenate([[0.9, 0.85], np.linspace(0.05, 0.4, 28)])
        y = np.concatenate([[1.0, 1.0], np.zeros(28)])
        s = PredictionSample(probabilities=p, outcomes=y)
        spec = BootstrapSpec(replicates=100, master_seed=2, stratified=True)
        est = bootstrap_ci(s, auroc, spec)
        assert est.ci.dropped == 0

    def test_dropped_replicates_counted_exactly(self):
        # single event: resamples missing it make auroc undefined
        p = np.array([0.9, 0.1, 0.2, 0.3, 0.4])
        y = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
        s = PredictionSample(probabilities=p, outcomes=y)
        spec = BootstrapSpec(replicates=60, master_seed=3)
        want = 0
        for r in range(spec.replicates):
            idx = resample_indices(substream(3, r), s)
            if (idx != 0).all():
                want += 1
        assert 0 < want <= 30, "fixture needs tuning"
        est = bootstrap_ci(s, auroc, spec)
        assert est.ci.dropped == want

    def test_refused_when_majority_drop(self):
        s = make_sample(7, n=40)

        def flaky(part):
            if part is s:
                return 0.5
            raise UndefinedMeasureError("never works on a resample")

        with pytest.raises(BootstrapRefusedError) as err:
            bootstrap_ci(s, flaky, BootstrapSpec(replicates=20))
        assert err.value.dropped == 20
        assert err.value.replicates == 20

    def test_nan_point_estimate_refused(self):
        s = make_sample(10, n=30)
        with pytest.raises(UndefinedMeasureError):
            bootstrap_ci(s, lambda _: math.nan, BootstrapSpec(replicates=10))

    def test_infinite_replicates_are_kept(self):
        s = make_sample(12, n=30)

        def spiky(part):
            return 1.0 if part is s else math.inf

        est = bootstrap_ci(s, spiky, BootstrapSpec(replicates=10))
        assert est.ci.dropped == 0
        assert est.ci.upper == math.inf

    def test_named_measure(self):
        s = make_sample(16, n=40)
        est = bootstrap_ci(s, auroc, BootstrapSpec(replicates=20))
        assert est.name == "auroc"
        est2 = bootstrap_ci(s, auroc, BootstrapSpec(replicates=20), name="area")
        assert est2.name == "area"
