"""Selects the smoother implementation at import time.

The compiled extension is preferred; the NumPy fallback is used when the
extension is missing or when the environment variable
RISKBENCH_PURE_PYTHON is set to a non-empty value other than "0".
Both implement the same pinned algorithm, so results agree to within
floating-point summation order (tested at 1e-10).
"""

import os

from . import _smoother_py

_forced_pure = os.environ.get("RISKBENCH_PURE_PYTHON", "") not in ("", "0")

if _forced_pure:
    _impl = _smoother_py
    _backend = "python"
else:
    try:
        from . import _speedups as _impl
        _backend = "ext"
    except ImportError:
        _impl = _smoother_py
        _backend = "python"

local_linear_smooth = _impl.local_linear_smooth


def backend() -> str:
    """Name of the active smoother implementation: 'ext' or 'python'."""
    return _backend
