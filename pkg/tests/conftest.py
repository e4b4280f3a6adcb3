import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from riskbench.data_model import PredictionSample
from riskbench.metrics import ConfusionCounts

# Four records, hand-checkable: events carry the two highest probabilities.
D4_P = np.array([0.2, 0.8, 0.6, 0.4])
D4_Y = np.array([0.0, 1.0, 1.0, 0.0])

# Published external-validation confusion at t = 0.10 (N = 894).
ADNEX_COUNTS = ConfusionCounts(tp=414, fp=164, tn=296, fn=20, threshold=0.10)

# Optional raw validation dataset; most published-value checks that need
# record-level data skip when it is absent.
ADNEX_CSV = os.path.join(os.path.dirname(__file__), "data", "adnex.csv")


@pytest.fixture
def d4():
    return PredictionSample(probabilities=D4_P.copy(), outcomes=D4_Y.copy())


@pytest.fixture
def adnex_counts():
    return ADNEX_COUNTS


def make_sample(seed, n=200, calibrated=True, discrete=False):
    """Random informative sample; guaranteed to contain both classes."""
    rng = np.random.default_rng(seed)
    lp = rng.normal(-0.5, 1.2, n)
    p = 1.0 / (1.0 + np.exp(-lp))
    if discrete:
        p = np.round(p, 1)
        p = np.clip(p, 0.05, 0.95)
    if calibrated:
        y = (rng.random(n) < p).astype(float)
    else:
        y = (rng.random(n) < 1.0 / (1.0 + np.exp(-(lp - 1.0)))).astype(float)
    if y.min() == y.max():  # degenerate draw: force one flip
        y[0] = 1.0 - y[0]
    return PredictionSample(probabilities=p, outcomes=y)


@pytest.fixture
def random_sample():
    return make_sample


@pytest.fixture(scope="session")
def reduced_study():
    """200-dataset run of the distortion study, shared across tests."""
    from riskbench.simlab import SimulationSpec, run_properness_study

    spec = SimulationSpec(n_datasets=200, n_per_dataset=1000, master_seed=0)
    return run_properness_study(spec, threads=int(os.environ.get(
        "RISKBENCH_TEST_THREADS", "1")))


def full_study_enabled():
    return os.environ.get("RISKBENCH_FULL_STUDY", "") not in ("", "0")
