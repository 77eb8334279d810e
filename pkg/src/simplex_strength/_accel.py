"""Backend selection for the hot kernels.

Kernels are compiled with numba when it is importable. Setting the
environment variable ``SIMPLEX_STRENGTH_PURE_NUMPY=1`` forces the
vectorized numpy implementations instead; both are always importable so
they can be compared side by side.
"""
import os

ENV_FLAG = "SIMPLEX_STRENGTH_PURE_NUMPY"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None
    HAVE_NUMBA = False


def _flag_set(value):
    return value.strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _flag_set(os.environ.get(ENV_FLAG, ""))


def njit(fn):
    """Compile ``fn`` in nopython mode, or return it untouched without numba."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
