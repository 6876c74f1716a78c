"""Backend selection for the hot Lindblad kernels.

The compiled Cython module is preferred; the NumPy implementation is used if
the extension is unavailable or ``ENSEMBLEMIX_PURE_PYTHON=1`` is set.
"""

import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)

_FORCE_PURE = os.environ.get("ENSEMBLEMIX_PURE_PYTHON", "").strip() not in ("", "0")

try:
    if _FORCE_PURE:
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as _backend

    BACKEND = "cython"
except ImportError as exc:
    logger.debug("using NumPy kernels: %s", exc)
    _backend = _pykernels
    BACKEND = "python"

rhs = _backend.rhs
rk4_advance = _backend.rk4_advance


def get_backend(name: str | None = None):
    """Return a kernel module by name ('cython' or 'python'); default is the active one."""
    if name is None:
        return _backend
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
