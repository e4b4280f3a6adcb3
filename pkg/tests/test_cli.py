import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from riskbench.cli import main
from riskbench.data_model import DEFAULT_CLAMP
from conftest import make_sample


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("RISKBENCH_SEED", raising=False)


def write_csv(path, sample, prob_col="p", outcome_col="y"):
    sample.to_csv(path, prob_col=prob_col, outcome_col=outcome_col)
    return str(path)


@pytest.fixture
def sample_csv(tmp_path):
    return write_csv(tmp_path / "preds.csv", make_sample(31, n=120))


def run_evaluate(csv_path, out, *extra):
    return main([
        "evaluate", "--input", csv_path, "--prob-col", "p",
        "--outcome-col", "y", "--threshold", "0.2",
        "--dca-range", "0.05:0.4", "--out", str(out), *extra,
    ])


class TestConsoleScript:
    def test_installed_and_lists_subcommands(self):
        exe = shutil.which("riskbench")
        assert exe is not None
        res = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert res.returncode == 0
        for name in ("evaluate", "recalibrate", "compare", "curves",
                     "simulate", "grid"):
            assert name in res.stdout


class TestEvaluate:
    def test_happy_path(self, sample_csv, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_evaluate(sample_csv, out) == 0
        assert "wrote" in capsys.readouterr().out
        rep = json.loads((out / "report.json").read_text())
        assert rep["sample"]["n"] == 120
        assert rep["config"]["threshold"] == 0.2
        assert rep["config"]["seed"] == 0
        ids = {m for dom in rep["measures"].values() for m in dom}
        assert len(ids) + len(rep["skipped"]) == 32
        for kind in ("roc", "pr", "decision", "cost"):
            for name in rep["artifacts"][kind]:
                assert (out / name).exists()

    def test_threads_never_change_bytes(self, sample_csv, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_evaluate(sample_csv, a, "--seed", "9",
                            "--boot-reps", "40", "--threads", "1") == 0
        assert run_evaluate(sample_csv, b, "--seed", "9",
                            "--boot-reps", "40", "--threads", "3") == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "roc.csv").read_bytes() == (b / "roc.csv").read_bytes()
        rep = json.loads((a / "report.json").read_text())
        ci = rep["measures"]["discrimination"]["auroc"]["ci"]
        assert ci["replicates"] == 40

    def test_bare_clamp_flag_uses_default_epsilon(self, tmp_path):
        s = make_sample(40, n=60)
        p = s.probabilities.copy()
        p[0], p[1] = 0.0, 1.0
        y = s.outcomes.copy()
        y[0], y[1] = 0.0, 1.0
        from riskbench.data_model import PredictionSample

        path = write_csv(tmp_path / "edge.csv",
                         PredictionSample(probabilities=p, outcomes=y))
        out = tmp_path / "run"
        assert run_evaluate(path, out, "--clamp") == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["config"]["clamp"] == DEFAULT_CLAMP
        assert "loglikelihood" in rep["measures"]["overall"]
        out2 = tmp_path / "run2"
        assert run_evaluate(path, out2) == 0
        rep2 = json.loads((out2 / "report.json").read_text())
        assert "loglikelihood" in rep2["skipped"]

    def test_subgroups(self, tmp_path):
        from riskbench.data_model import PredictionSample

        s = make_sample(17, n=140)
        grouped = PredictionSample(
            probabilities=s.probabilities, outcomes=s.outcomes,
            groups=np.array(["a"] * 70 + ["b"] * 70),
        )
        path = tmp_path / "g.csv"
        grouped.to_csv(path, prob_col="p", outcome_col="y", group_col="site")
        out = tmp_path / "run"
        code = main([
            "evaluate", "--input", str(path), "--prob-col", "p",
            "--outcome-col", "y", "--group-col", "site", "--threshold", "0.2",
            "--dca-range", "0.05:0.4", "--out", str(out), "--subgroups",
        ])
        assert code == 0
        rep = json.loads((out / "report.json").read_text())
        assert set(rep["subgroups"]["groups"]) == {"a", "b"}

    def test_subgroups_need_group_column(self, sample_csv, tmp_path, capsys):
        code = run_evaluate(sample_csv, tmp_path / "x", "--subgroups")
        assert code == 2
        assert "group-col" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert run_evaluate(str(tmp_path / "nope.csv"), tmp_path / "o") == 2
        assert "riskbench:" in capsys.readouterr().err

    def test_bad_record_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("p,y\n0.5,1\nmaybe,0\n")
        assert run_evaluate(str(path), tmp_path / "o") == 2
        assert "row 3" in capsys.readouterr().err

    def test_missing_threshold_is_usage_error(self, sample_csv, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["evaluate", "--input", sample_csv, "--prob-col", "p",
                  "--outcome-col", "y", "--dca-range", "0.1:0.4",
                  "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_env_seed_fallback(self, sample_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("RISKBENCH_SEED", "77")
        out = tmp_path / "run"
        assert run_evaluate(sample_csv, out) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["config"]["seed"] == 77

    def test_env_seed_must_be_integer(self, sample_csv, tmp_path, monkeypatch,
                                      capsys):
        monkeypatch.setenv("RISKBENCH_SEED", "lucky")
        assert run_evaluate(sample_csv, tmp_path / "o") == 2
        assert "RISKBENCH_SEED" in capsys.readouterr().err

    def test_explicit_seed_wins_over_env(self, sample_csv, tmp_path,
                                         monkeypatch):
        monkeypatch.setenv("RISKBENCH_SEED", "77")
        out = tmp_path / "run"
        assert run_evaluate(sample_csv, out, "--seed", "3") == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["config"]["seed"] == 3


class TestRecalibrate:
    def test_happy_path(self, tmp_path, capsys):
        path = write_csv(tmp_path / "m.csv", make_sample(5, n=150,
                                                         calibrated=False))
        out = tmp_path / "run"
        code = main(["recalibrate", "--input", str(path), "--prob-col", "p",
                     "--outcome-col", "y", "--out", str(out)])
        assert code == 0
        assert "intercept" in capsys.readouterr().out
        fit = json.loads((out / "recalibration.json").read_text())
        assert set(fit) == {"intercept", "slope"}
        assert (out / "recalibrated.csv").exists()

    def test_separated_data_exits_3(self, tmp_path, capsys):
        path = tmp_path / "sep.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p", "y"])
            for p, y in [(0.1, 0), (0.2, 0), (0.8, 1), (0.9, 1)] * 10:
                w.writerow([p, y])
        code = main(["recalibrate", "--input", str(path), "--prob-col", "p",
                     "--outcome-col", "y", "--out", str(tmp_path / "o")])
        assert code == 3
        assert "cannot compute" in capsys.readouterr().err


class TestCompare:
    def test_two_columns_same_outcomes(self, tmp_path):
        s = make_sample(23, n=110)
        path = tmp_path / "two.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["model_a", "model_b", "y"])
            for p, y in zip(s.probabilities, s.outcomes):
                w.writerow([repr(float(p)), repr(float(p) ** 2), int(y)])
        out = tmp_path / "run"
        code = main(["compare", "--input", str(path),
                     "--prob-col-a", "model_a", "--prob-col-b", "model_b",
                     "--outcome-col", "y", "--threshold", "0.2",
                     "--out", str(out)])
        assert code == 0
        rep = json.loads((out / "compare.json").read_text())
        assert rep["labels"] == ["model_a", "model_b"]
        # squaring keeps ranks, so the discrimination rows do not move
        assert rep["delta"]["auroc"] == 0.0
        assert set(rep["panels"]) == {"model_a", "model_b"}


class TestCurves:
    def test_kind_selection(self, sample_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["curves", "--input", sample_csv, "--prob-col", "p",
                     "--outcome-col", "y", "--out", str(out),
                     "--kinds", "roc,pr"])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest) == {"roc", "pr"}
        assert (out / "roc.svg").exists()

    def test_decision_needs_range(self, sample_csv, tmp_path):
        out = tmp_path / "run"
        code = main(["curves", "--input", sample_csv, "--prob-col", "p",
                     "--outcome-col", "y", "--out", str(out)])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert "threshold range" in manifest["skipped"]["decision"]
        assert "roc" in manifest

    def test_class_pair_vocabulary(self, sample_csv, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["curves", "--input", sample_csv, "--prob-col", "p",
                     "--outcome-col", "y", "--out", str(out),
                     "--kinds", "classification",
                     "--class-pair", "sensitivity:fpr"])
        assert code == 0
        header = (out / "classification.csv").read_text().splitlines()[0]
        assert header == "threshold,sensitivity,fpr"
        code = main(["curves", "--input", sample_csv, "--prob-col", "p",
                     "--outcome-col", "y", "--out", str(tmp_path / "r2"),
                     "--kinds", "classification",
                     "--class-pair", "sensitivity:lift"])
        assert code == 2
        assert "lift" in capsys.readouterr().err


class TestSimulate:
    def test_tiny_study_and_thread_independence(self, tmp_path, capsys):
        args = ["simulate", "properness", "--datasets", "6", "--size", "150",
                "--variants", "1,3", "--seed", "5"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(a), "--threads", "1"]) == 0
        assert "simulated 6 datasets x 2 variants" in capsys.readouterr().out
        assert main(args + ["--out", str(b), "--threads", "3"]) == 0
        for name in ("variant_means.csv", "exclusions.csv",
                     "measure_distributions.csv", "study_meta.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        meta = json.loads((a / "study_meta.json").read_text())
        assert meta["master_seed"] == 5
        assert meta["variants"] == [1, 3]
        assert "threads" not in meta


class TestGrid:
    def test_default_filter_counts(self, tmp_path, capsys):
        out = tmp_path / "grid"
        assert main(["grid", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "4851 combinations (231 sensitivity/specificity pairs)" in text
        meta = json.loads((out / "grid_meta.json").read_text())
        assert meta["n_combinations"] == 4851
        assert meta["n_pairs"] == 231
        with open(out / "grid_combinations.csv") as fh:
            n_rows = sum(1 for _ in fh) - 1
        assert n_rows == 4851

    def test_no_filter(self, tmp_path, capsys):
        out = tmp_path / "grid"
        assert main(["grid", "--out", str(out), "--no-filter"]) == 0
        assert "9261 combinations" in capsys.readouterr().out
