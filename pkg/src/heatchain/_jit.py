"""Backend switch between numba-compiled kernels and the pure-numpy path.

Set ``HEATCHAIN_NUMBA=0`` in the environment before import to force the
numpy implementation; any other value (or unset) uses numba when it can be
imported.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_REQUESTED = os.environ.get("HEATCHAIN_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")
NUMBA_ENABLED = NUMBA_REQUESTED and numba is not None


def maybe_njit(fn):
    """Compile ``fn`` with numba when the numba backend is active."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn
