"""Optional numba compilation of the simulation kernels.

Set ``FVTREE_DISABLE_NUMBA=1`` before import to run every kernel as plain
Python/numpy.  Both paths consume random numbers identically, so results
agree bit for bit.
"""

import os

DISABLED = os.environ.get("FVTREE_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if DISABLED:
        raise ImportError("numba disabled by FVTREE_DISABLE_NUMBA")
    import numba

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "python"


def jit(fn):
    """Compile ``fn`` in nopython mode when numba is active, else return it unchanged."""
    if HAS_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def python_version(fn):
    """The uncompiled function behind a kernel."""
    return getattr(fn, "py_func", fn)
