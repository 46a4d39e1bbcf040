"""Hot loops, with a numba implementation and a pure-numpy fallback.

The numba backend is used when numba imports and ``NEEDLECAST_NO_NUMBA`` is
unset (or "0"). Both backends produce bit-identical results.
"""
import os
from types import SimpleNamespace

from . import _numpy

_FUNCS = ("distances", "nearest_batch", "propagate", "jacobi")

numpy_backend = SimpleNamespace(name="numpy", **{f: getattr(_numpy, f) for f in _FUNCS})

try:
    from . import _numba
except ImportError:  # numba is an optional extra
    numba_backend = None
else:
    numba_backend = SimpleNamespace(name="numba", **{f: getattr(_numba, f) for f in _FUNCS})


def _numba_disabled():
    return os.environ.get("NEEDLECAST_NO_NUMBA", "0").lower() not in ("", "0", "false", "no")


def get_backend(name=None):
    """Backend by name ("numba" / "numpy"); default follows the environment."""
    if name is None:
        name = "numpy" if (_numba_disabled() or numba_backend is None) else "numba"
    if name == "numba":
        if numba_backend is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return numba_backend
    if name == "numpy":
        return numpy_backend
    raise ValueError(f"unknown backend {name!r}")
