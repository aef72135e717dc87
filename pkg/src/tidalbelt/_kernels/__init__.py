"""Numeric kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
pure-Python implementations are used.  Set ``TIDALBELT_KERNELS=py`` to force
the fallback or ``TIDALBELT_KERNELS=c`` to require the extension (raising if
it is missing), e.g. for the backend comparison benchmark.
"""

import os

from . import _pykernels

_requested = os.environ.get("TIDALBELT_KERNELS", "").strip().lower()
if _requested not in ("", "c", "py"):
    raise ImportError(
        f"TIDALBELT_KERNELS must be 'c' or 'py', got {_requested!r}"
    )

if _requested == "py":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _requested == "c":
            raise
        _impl = _pykernels

BACKEND = _impl.BACKEND
moving_average = _impl.moving_average
alternating_extrema = _impl.alternating_extrema
betainc = _impl.betainc

__all__ = ["BACKEND", "moving_average", "alternating_extrema", "betainc"]
