"""Select the compiled kernel when available, numpy otherwise.

Set ``TRFOCI_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("TRFOCI_PURE_PYTHON", "") not in ("", "0"):
    propagate = _kernels_py.propagate
    BACKEND = "python"
else:
    try:
        from ._bloch_ext import propagate
        BACKEND = "compiled"
    except ImportError:  # extension not built
        propagate = _kernels_py.propagate
        BACKEND = "python"
