"""Kernel backend selection.

Set ``KLTEST_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable. The choice is read once, at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
NUMBA_DISABLED = os.environ.get("KLTEST_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def jit(fn):
    """Compile ``fn`` with numba if available, else return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
