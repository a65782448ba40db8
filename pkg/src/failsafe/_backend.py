"""Kernel backend selection.

The default backend JIT-compiles the hot kernels with numba; setting
``FAILSAFE_BACKEND=numpy`` (or running where numba is not importable)
selects the pure-numpy fallback.  Both backends are exact and produce
identical results; ``failsafe.cli --mode bench`` times them against each
other.
"""

import os
import warnings

ENV_VAR = "FAILSAFE_BACKEND"

_active = None


def _load(name):
    if name == "numpy":
        from . import _kernels_numpy
        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba
    raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")


def _select_default():
    requested = os.environ.get(ENV_VAR, "").strip().lower()
    if requested:
        return _load(requested)
    try:
        return _load("numba")
    except ImportError:
        warnings.warn("numba unavailable; falling back to the numpy backend")
        return _load("numpy")


def active():
    """Return the active kernel module."""
    global _active
    if _active is None:
        _active = _select_default()
    return _active


def use(name):
    """Switch backends programmatically (used by tests and the benchmark)."""
    global _active
    _active = _load(name)
    return _active
