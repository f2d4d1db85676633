"""Propagation kernels: the compiled extension when built, numpy otherwise.

Set ``PERES_LAB_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

if os.environ.get("PERES_LAB_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _propagate as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
        BACKEND = "python"

propagate = _impl.propagate
back_substitute = _impl.back_substitute

__all__ = ["BACKEND", "propagate", "back_substitute"]
