"""Kernel backend selection.

The hot numerical loops (geodesic stepping, finite-difference Christoffels,
cloud Hausdorff sweeps) exist twice: a numba-compiled implementation and a
vectorised pure-numpy twin with identical call signatures and semantics.

Selection order:

1. ``TRANSNORMAL_LAB_NUMBA=0`` (or ``false``/``off``) forces the numpy path.
2. ``TRANSNORMAL_LAB_NUMBA=1`` requires numba and fails loudly if missing.
3. Unset: numba when importable, numpy otherwise.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import config
from .errors import InputError

_FORCED: str | None = None
_CACHED: str | None = None

_FALSY = {"0", "false", "off", "no"}
_TRUTHY = {"1", "true", "on", "yes"}


def _numba_importable() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend() -> str:
    """Resolve the backend name, either ``"numba"`` or ``"numpy"``."""
    global _CACHED
    if _FORCED is not None:
        return _FORCED
    if _CACHED is not None:
        return _CACHED
    raw = os.environ.get(config.ENV_BACKEND, "").strip().lower()
    if raw in _FALSY:
        _CACHED = "numpy"
    elif raw in _TRUTHY:
        if not _numba_importable():
            raise InputError(
                f"{config.ENV_BACKEND}={raw} requested the numba backend "
                "but numba is not importable"
            )
        _CACHED = "numba"
    else:
        _CACHED = "numba" if _numba_importable() else "numpy"
    if _CACHED == "numba":
        config.apply_thread_cap()
    return _CACHED


def get_kernels():
    """Import and return the active kernel module."""
    if active_backend() == "numba":
        from .kernels import numba_impl as impl
    else:
        from .kernels import numpy_impl as impl
    return impl


@contextmanager
def use_backend(name: str):
    """Temporarily pin the backend; used by tests and the benchmark."""
    global _FORCED, _CACHED
    if name not in ("numba", "numpy"):
        raise InputError(f"unknown backend {name!r}")
    if name == "numba" and not _numba_importable():
        raise InputError("numba backend requested but numba is not importable")
    previous = _FORCED
    _FORCED = name
    _CACHED = None
    try:
        yield
    finally:
        _FORCED = previous
        _CACHED = None
