"""Numeric kernel backends.

Two interchangeable implementations of the hot loops (CART tree growth,
SMO) exist: a compiled extension and a pure-Python fallback. They are
written to produce bit-identical outputs; selection is a performance
choice only.

Default: the compiled backend when importable, else pure. Override with
the environment variable ``STACKGEN_KERNELS=pure|native`` (an explicit
request for an unavailable backend is an error, not a silent fallback).
Tests can swap backends with the :func:`use_backend` context manager.
"""

from __future__ import annotations

import contextlib
import os

from . import pure

_BACKENDS = {"pure": pure}

try:
    from . import _native  # compiled at install time when a toolchain exists

    _BACKENDS["native"] = _native
except ImportError:
    _native = None


def _initial_backend():
    requested = os.environ.get("STACKGEN_KERNELS", "").strip().lower()
    if requested:
        if requested not in ("pure", "native"):
            raise ImportError(
                f"STACKGEN_KERNELS={requested!r}: valid values are 'pure' and 'native'"
            )
        if requested not in _BACKENDS:
            raise ImportError(
                "STACKGEN_KERNELS=native but the compiled kernels are not "
                "installed; rebuild the package with Cython and a C compiler"
            )
        return _BACKENDS[requested]
    return _BACKENDS.get("native", pure)


_active = _initial_backend()


def backend():
    """The module providing grow_tree and smo_solve right now."""
    return _active


def backend_name() -> str:
    return _active.BACKEND_NAME


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily force a specific backend (for tests and benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    previous = _active
    _active = _BACKENDS[name]
    try:
        yield _active
    finally:
        _active = previous


def grow_tree(X, y, seed, max_depth, min_leaf, max_features, bootstrap=True):
    return _active.grow_tree(X, y, seed, max_depth, min_leaf, max_features, bootstrap)


def smo_solve(K, y, C, tol, eps, max_sweeps):
    return _active.smo_solve(K, y, C, tol, eps, max_sweeps)
