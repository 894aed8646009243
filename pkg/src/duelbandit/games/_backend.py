"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set DUELBANDIT_BACKEND=python (or =c) to force a choice; "c" raises if the
extension is missing rather than silently falling back.
"""

from __future__ import annotations

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_FORCED = os.environ.get("DUELBANDIT_BACKEND", "auto").strip().lower()

if _FORCED in ("py", "python", "fallback"):
    _impl = _kernels_py
elif _FORCED in ("c", "compiled", "ext"):
    from . import _speedups as _impl  # ImportError here is intentional
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        log.info("compiled solver kernels unavailable; using numpy fallback")
        _impl = _kernels_py


def backend_name() -> str:
    return _impl.BACKEND_NAME


def get_kernels(name: str | None = None):
    """Return the kernel module for `name` (default: the selected backend)."""
    if name is None:
        return _impl
    if name in ("py", "python", "fallback"):
        return _kernels_py
    if name in ("c", "compiled", "ext"):
        from . import _speedups
        return _speedups
    raise ValueError(f"unknown backend {name!r}")


epigraph_simplex = _impl.epigraph_simplex
minmax_descent = _impl.minmax_descent
