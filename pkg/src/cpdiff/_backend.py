"""Kernel selection: compiled extension if importable, else numpy fallback.

Set ``CPDIFF_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"
if not os.environ.get("CPDIFF_PURE_PYTHON"):
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = None
else:
    kernels = None

if kernels is None:
    from . import _pykernels as kernels

from . import _pykernels as pykernels

__all__ = ["BACKEND", "kernels", "pykernels"]
