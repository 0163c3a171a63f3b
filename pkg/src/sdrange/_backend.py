"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
numpy/pure-Python ``_pure`` module.  Setting ``SDRANGE_PURE=1`` forces the
fallback.  Both expose the same functions with identical results.
"""

import os

from . import _pure

if os.environ.get("SDRANGE_PURE", "") not in ("", "0"):
    kernels = _pure
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _pure

BACKEND = "compiled" if kernels is not _pure else "python"
