"""Kernel backend selection.

The compiled Cython extension is preferred; the numpy fallback is used when
the extension is unavailable or when PAVETEX_FORCE_PYTHON_KERNELS is set.
Both expose `haralick_window_maps(q, levels, window)` with identical
semantics.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("PAVETEX_FORCE_PYTHON_KERNELS"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

haralick_window_maps = _impl.haralick_window_maps


def backend_name() -> str:
    """Name of the active kernel backend ('cython' or 'python')."""
    return BACKEND
