"""Backend selection for the recurrence kernel.

The compiled extension is used when importable; setting
``JACOBI_SPECTRA_PURE=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _kernel_py

BACKEND = "python"
advance = _kernel_py.advance

if os.environ.get("JACOBI_SPECTRA_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        advance = _kernel.advance
        BACKEND = "cython"


def get_advance(backend: str | None = None):
    """Return the ``advance`` implementation for ``backend`` (None = active)."""
    if backend is None:
        return advance
    if backend == "python":
        return _kernel_py.advance
    if backend == "cython":
        from . import _kernel  # type: ignore[attr-defined]

        return _kernel.advance
    raise ValueError(f"unknown backend {backend!r}")
