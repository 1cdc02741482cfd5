"""Backend selection for the compiled integer kernels.

``ENTANGLED_T1_BACKEND=numpy`` forces the pure-numpy path; the default is
``numba`` when it imports, otherwise ``numpy``. ``ENTANGLED_T1_THREADS`` caps
the worker count handed to numba.
"""

from __future__ import annotations

import os

try:
    import numba

    # prefer layers that need no external runtime check
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def _initial() -> str:
    requested = os.environ.get("ENTANGLED_T1_BACKEND", "numba").strip().lower()
    if requested not in _VALID:
        raise ValueError(f"ENTANGLED_T1_BACKEND must be one of {_VALID}, got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        return "numpy"
    return requested


_backend = _initial()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch backend at runtime; returns the previous one."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def set_threads(n: int | None) -> None:
    if n is None or not HAVE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


set_threads(int(os.environ["ENTANGLED_T1_THREADS"]) if os.environ.get("ENTANGLED_T1_THREADS") else None)


def thread_count() -> int:
    if not HAVE_NUMBA:
        return 1
    import numba

    return numba.get_num_threads()
