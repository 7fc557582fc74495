"""Selects the compiled trial kernel when available, else the pure-Python one.

Set ``FAE_PURE_PYTHON=1`` to force the fallback at import time.
"""

from __future__ import annotations

import os

from .errors import DomainError

try:
    if os.environ.get("FAE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python forced by FAE_PURE_PYTHON")
    from . import _kernel
except ImportError:
    _kernel = None

HAVE_COMPILED = _kernel is not None
DEFAULT = "cython" if HAVE_COMPILED else "python"


def resolve(backend: str | None) -> str:
    if backend is None:
        return DEFAULT
    if backend not in ("cython", "python"):
        raise DomainError(f"unknown backend {backend!r}")
    if backend == "cython" and not HAVE_COMPILED:
        raise DomainError("compiled kernel is not built; reinstall with a C compiler and Cython")
    return backend


def compiled():
    return _kernel
