"""Selects the scoring-kernel implementation at import time.

The compiled Cython core is preferred; the numpy module is the fallback
when the extension is not built or ``CENTRICAE_PURE_PYTHON`` is set to a
non-empty value other than ``0``.
"""

import os

from . import _purepy

_force_pure = os.environ.get("CENTRICAE_PURE_PYTHON", "") not in ("", "0")

kernels = _purepy
BACKEND = "python"
if not _force_pure:
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass


def available_backends():
    """Mapping of backend name to kernel module for every importable backend."""
    found = {"python": _purepy}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
