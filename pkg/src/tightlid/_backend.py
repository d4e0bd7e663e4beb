"""Kernel backend selection.

The hot loops (kNN scan, moving-center pair sums, intra-neighborhood pair
sums) exist twice: as numba ``@njit`` kernels and as vectorized numpy code.
Both produce bit-identical output. Set ``TIGHTLID_DISABLE_NUMBA=1`` to force
the numpy path; it is also used when numba cannot be imported.

``TIGHTLID_THREADS`` caps the worker count of the parallel kernels (0 = auto).
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_FALSY = {"", "0", "false", "no", "off"}


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in _FALSY


NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _flag("TIGHTLID_DISABLE_NUMBA")
BACKEND = "numba" if USE_NUMBA else "numpy"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ('numba' or 'numpy'), default active."""
    name = name or BACKEND
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba backend requested but numba is not installed")
        from tightlid import _kernels_numba as mod
    elif name == "numpy":
        from tightlid import _kernels_numpy as mod
    else:
        raise ValueError(f"unknown backend {name!r}")
    return mod


def set_threads(n):
    """Cap kernel worker threads; ``n=0`` restores the default. No-op without numba."""
    if numba is None:
        return
    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(limit if n <= 0 else min(int(n), limit))


def _init_threading_layer():
    # probing TBB first emits a version warning on some installs
    if numba is not None and "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


def _init_threads():
    value = os.environ.get("TIGHTLID_THREADS", "").strip()
    if value:
        try:
            set_threads(int(value))
        except ValueError:
            pass


_init_threading_layer()
_init_threads()
