"""Kernel selection: compiled extension when available, numpy otherwise.

Set ``ECKHAUS_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _fallback

BACKEND = "numpy"
if os.environ.get("ECKHAUS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

quad_conv = _impl.quad_conv
cubic_conv = _impl.cubic_conv
quad_bloch = _impl.quad_bloch
cubic_bloch = _impl.cubic_bloch

__all__ = ["BACKEND", "quad_conv", "cubic_conv", "quad_bloch", "cubic_bloch"]
