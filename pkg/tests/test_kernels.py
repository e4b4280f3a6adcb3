"""The two smoother backends must be interchangeable."""

import subprocess
import sys

import numpy as np
import pytest

from riskbench import kernels
from riskbench._smoother_py import local_linear_smooth as py_smooth

try:
    from riskbench._speedups import local_linear_smooth as ext_smooth
    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False

needs_ext = pytest.mark.skipif(not HAVE_EXT, reason="extension not built")


def _cases():
    rng = np.random.default_rng(42)
    yield np.sort(rng.random(50)), rng.random(50)
    # heavy ties
    x = np.repeat(np.linspace(0.1, 0.9, 9), 6)
    yield x, rng.random(x.size)
    # two points only
    yield np.array([0.2, 0.8]), np.array([0.0, 1.0])
    # clustered with outlying tail
    x = np.concatenate([np.full(30, 0.5), np.linspace(0.9, 1.0, 5)])
    yield x, rng.random(35)


@needs_ext
@pytest.mark.parametrize("span", [0.3, 0.75, 1.0])
def test_backends_agree(span):
    grid = np.linspace(0.0, 1.0, 41)
    for x, y in _cases():
        a = ext_smooth(x, y, grid, span)
        b = py_smooth(x, y, grid, span)
        np.testing.assert_allclose(a, b, rtol=0.0, atol=1e-10)


def test_linear_data_recovered_exactly():
    x = np.linspace(0.0, 1.0, 60)
    y = 0.8 * x + 0.1
    grid = np.array([0.25, 0.5, 0.75])
    np.testing.assert_allclose(
        kernels.local_linear_smooth(x, y, grid, 0.75), 0.8 * grid + 0.1,
        atol=1e-12)


def test_constant_y():
    x = np.sort(np.random.default_rng(1).random(30))
    out = kernels.local_linear_smooth(x, np.full(30, 0.4),
                                      np.linspace(0, 1, 11), 0.75)
    np.testing.assert_allclose(out, 0.4, atol=1e-12)


def test_duplicate_block_uses_local_mean():
    # every point in the window sits at the evaluation point itself
    x = np.full(10, 0.5)
    y = np.arange(10.0)
    out = kernels.local_linear_smooth(x, y, np.array([0.5]), 0.75)
    assert out[0] == pytest.approx(4.5)


def test_single_point():
    out = kernels.local_linear_smooth(np.array([0.3]), np.array([0.7]),
                                      np.array([0.1, 0.9]), 0.75)
    np.testing.assert_allclose(out, 0.7)


def test_empty_eval_grid():
    out = kernels.local_linear_smooth(np.array([0.3, 0.6]),
                                      np.array([0.1, 0.2]),
                                      np.array([]), 0.75)
    assert out.shape == (0,)


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        kernels.local_linear_smooth(np.array([]), np.array([]),
                                    np.array([0.5]), 0.75)


def test_readonly_inputs_accepted():
    x = np.linspace(0, 1, 20)
    y = x.copy()
    for a in (x, y):
        a.flags.writeable = False
    out = kernels.local_linear_smooth(x, y, x, 0.75)
    np.testing.assert_allclose(out, x, atol=1e-12)


def test_unsorted_input_matches_sorted():
    rng = np.random.default_rng(7)
    x = rng.random(40)
    y = rng.random(40)
    grid = np.linspace(0, 1, 9)
    a = kernels.local_linear_smooth(x, y, grid, 0.75)
    order = np.argsort(x, kind="stable")
    b = kernels.local_linear_smooth(x[order], y[order], grid, 0.75)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_env_override_selects_python_backend():
    import os

    env = dict(os.environ, RISKBENCH_PURE_PYTHON="1")
    code = "import riskbench.kernels as k; print(k.backend())"
    out = subprocess.run([sys.executable, "-c", code],
                         env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
