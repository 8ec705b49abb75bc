"""Optional numba acceleration for the per-trial kernels.

The run loops in :mod:`rejectron._kernels` are written in the subset of
numpy that numba compiles. When numba is importable they are jitted;
otherwise, or when ``REJECTRON_DISABLE_NUMBA`` is set to a truthy value,
the very same functions run as ordinary Python.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}

DISABLED_BY_ENV = os.environ.get("REJECTRON_DISABLE_NUMBA", "").strip().lower() in _TRUTHY

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled by REJECTRON_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "python"


def njit(fn=None, **options):
    """``numba.njit`` when available, identity decorator otherwise.

    Defaults to ``cache=True, nogil=True`` so repetitions can fan out over
    threads without contending on the GIL.
    """
    if fn is None:
        return lambda f: njit(f, **options)
    if not HAVE_NUMBA:
        return fn
    opts = {"cache": True, "nogil": True}
    opts.update(options)
    return numba.njit(**opts)(fn)


def python_impl(fn):
    """Return the uncompiled Python function behind a possibly-jitted one."""
    return getattr(fn, "py_func", fn)
