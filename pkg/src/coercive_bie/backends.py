"""Backend selection for the hot assembly loops.

The O(N^2) separated-pair sums run either through numba-jitted loops or
a pure-numpy path.  Select with the environment variable

    COERCIVE_BIE_BACKEND = auto | numba | numpy      (default: auto)

`auto` uses numba when it imports, numpy otherwise.  Singular-pair
rules are O(N) work and always run through the shared numpy path.
"""

import os

_ENV = "COERCIVE_BIE_BACKEND"
_cached = None


def backend_name():
    global _cached
    if _cached is None:
        choice = os.environ.get(_ENV, "auto").lower()
        if choice not in ("auto", "numba", "numpy"):
            raise ValueError(f"{_ENV} must be auto, numba, or numpy")
        if choice == "numpy":
            _cached = "numpy"
        else:
            try:
                from . import _pairs_numba  # noqa: F401
                _cached = "numba"
            except ImportError:
                if choice == "numba":
                    raise
                _cached = "numpy"
    return _cached


def use_numba():
    return backend_name() == "numba"


def set_threads(n):
    if use_numba():
        from . import _pairs_numba
        _pairs_numba.set_threads(n)


def reset_for_testing():
    global _cached
    _cached = None
