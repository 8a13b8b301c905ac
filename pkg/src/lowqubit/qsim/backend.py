"""Kernel backend selection.

Prefers the compiled Cython kernels; falls back to the pure-numpy twin
when the extension is missing.  Set LOWQUBIT_PURE_PYTHON=1 to force the
fallback (used by the kernel benchmark and the parity tests).
"""

import os

from . import _kernels_py

if os.environ.get("LOWQUBIT_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    """Either "compiled" or "python"."""
    return kernels.BACKEND


def python_kernels():
    """The pure-numpy kernel module, regardless of the active backend."""
    return _kernels_py


def compiled_kernels_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
