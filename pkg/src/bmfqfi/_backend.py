"""Selects numba-compiled or pure-numpy kernels.

Set ``BMFQFI_NO_NUMBA=1`` before import to force the numpy path.
"""
import os

ENV_FLAG = "BMFQFI_NO_NUMBA"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is installed in CI
    HAVE_NUMBA = False


def numba_requested(environ=None):
    env = os.environ if environ is None else environ
    return env.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and numba_requested()
