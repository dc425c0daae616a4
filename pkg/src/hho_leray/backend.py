"""Assembly kernel backend selection.

Two interchangeable kernel sets exist: a numba-compiled one and a pure
numpy one.  The environment variable ``HHO_BACKEND`` forces the choice
(``numba`` or ``numpy``); unset, numba is used when importable and numpy
otherwise.  ``HHO_THREADS`` caps the numba thread count.
"""

import os

from . import kernels_numpy


def _load_numba_kernels():
    import numba

    threads = os.environ.get("HHO_THREADS", "").strip()
    if threads:
        numba.set_num_threads(max(1, min(int(threads),
                                         numba.config.NUMBA_NUM_THREADS)))
    from . import kernels_numba
    return kernels_numba


def get_kernels(name=None):
    """Return the kernel module, honoring HHO_BACKEND when name is None."""
    if name is None:
        name = os.environ.get("HHO_BACKEND", "").strip().lower() or None
    if name == "numpy":
        return kernels_numpy
    if name == "numba":
        return _load_numba_kernels()
    if name is None:
        try:
            return _load_numba_kernels()
        except ImportError:
            return kernels_numpy
    raise ValueError(f"unknown backend {name!r}; use 'numba' or 'numpy'")
