"""Kernel selection.

The compiled kernel is used when it imports; set ``KPLEX_VNS_BACKEND=python``
to force the pure-Python kernel.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernel

_compiled: ModuleType | None
try:
    from . import _ckernel as _compiled
except ImportError:
    _compiled = None


def available() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "cython")
    return names


def get(name: str | None = None) -> ModuleType:
    """Kernel module by name; ``None`` means the default."""
    if name is None:
        name = os.environ.get("KPLEX_VNS_BACKEND", "").strip().lower() or None
    if name is None:
        return _compiled if _compiled is not None else _pykernel
    if name == "python":
        return _pykernel
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernel is not built; reinstall with a C compiler and Cython")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


kernel = get()
BACKEND: str = kernel.BACKEND
