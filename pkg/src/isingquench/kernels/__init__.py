"""Monte Carlo kernel backends.

The compiled Cython core is preferred; a pure-Python fallback with
bit-identical draw order is selected at import time when the extension is
missing.  Set ISINGQUENCH_KERNEL_BACKEND=python (or =cython) to force a
backend, e.g. for the benchmark in benchmarks/bench_kernels.py.
"""

import os

from . import _mc_py

_requested = os.environ.get("ISINGQUENCH_KERNEL_BACKEND", "").lower()
if _requested not in ("", "cython", "python"):
    raise ImportError(
        f"ISINGQUENCH_KERNEL_BACKEND must be 'cython' or 'python', got {_requested!r}"
    )

if _requested == "python":
    _impl = _mc_py
    BACKEND = "python"
else:
    try:
        from . import _mc as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _mc_py
        BACKEND = "python"

glauber_sweeps = _impl.glauber_sweeps
wolff_updates = _impl.wolff_updates

__all__ = ["BACKEND", "glauber_sweeps", "wolff_updates"]
