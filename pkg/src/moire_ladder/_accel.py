"""Backend selection for the hot numeric kernels.

The kernels in ``_kernels`` are written so that the same source compiles
under numba (loop-heavy helpers) or runs as plain vectorized numpy.  The
environment variable ``MOIRE_LADDER_NUMBA`` picks the path:

* unset or truthy ("1") -- use numba when it is importable,
* "0" / "false" / "off" / "no" -- force the pure-numpy fallback.

Import this module before ``_kernels``; the choice is fixed per process.
"""
import os

_FALSE_VALUES = ("0", "false", "off", "no")


def _requested() -> bool:
    return os.environ.get("MOIRE_LADDER_NUMBA", "1").strip().lower() not in _FALSE_VALUES


NUMBA_ENABLED = False
if _requested():
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    from numba import njit
else:

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit: leave the function as plain numpy."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend() -> str:
    """Name of the active kernel backend, 'numba' or 'numpy'."""
    return "numba" if NUMBA_ENABLED else "numpy"
