"""Numba/NumPy backend selection for the hot kernels.

The environment variable ``DROCC_BACKEND`` picks the implementation:

* ``numba`` (default): JIT-compiled kernels, falling back to NumPy with a
  warning if numba is not importable.
* ``numpy``: pure-NumPy kernels, no JIT anywhere.

``DROCC_NUM_THREADS`` caps the numba thread pool (row-parallel kernels only;
results are independent of the thread count).
"""

import os
import warnings

_requested = os.environ.get("DROCC_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"DROCC_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

NUMBA_ENABLED = False
if _requested == "numba":
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - depends on environment
        warnings.warn("numba not importable; falling back to NumPy kernels")

if NUMBA_ENABLED:
    from numba import njit, prange

    _threads = os.environ.get("DROCC_NUM_THREADS")
    if _threads:
        numba.set_num_threads(max(1, int(_threads)))
else:  # placeholders so kernel modules can import unconditionally
    njit = None
    prange = range


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
