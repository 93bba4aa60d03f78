"""Backend selection for the hot kernels.

Prefers the compiled Cython extension; falls back to the numpy
implementation when the extension was not built. Set
``MCBEAM_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by backend-equivalence tests).
"""

import os

from . import _fallback

if os.environ.get("MCBEAM_PURE_PYTHON"):
    dfgp = _fallback.dfgp
    BACKEND = "python"
else:
    try:
        from ._kernels import dfgp

        BACKEND = "cython"
    except ImportError:  # extension not built
        dfgp = _fallback.dfgp
        BACKEND = "python"


def backend() -> str:
    """Name of the kernel backend in use: 'cython' or 'python'."""
    return BACKEND
