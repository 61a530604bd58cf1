"""Hot-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension (``cadproj.kernels._native``) is preferred when it
built successfully; otherwise the numpy implementation is used. Both produce
bit-identical iterates. Selection can be forced with the ``CADPROJ_KERNEL``
environment variable (``native`` or ``python``) or at runtime with
:func:`set_backend`.
"""

import os

import numpy as np

from . import _python

_IMPLS = {"python": _python}
try:
    from . import _native

    _IMPLS["native"] = _native
except ImportError:  # extension not built; numpy fallback stays in charge
    _native = None

_env = os.environ.get("CADPROJ_KERNEL", "").strip().lower()
if _env:
    if _env not in _IMPLS:
        raise ImportError(
            f"CADPROJ_KERNEL={_env!r} requested but that backend is unavailable"
        )
    _active = _env
else:
    _active = "native" if "native" in _IMPLS else "python"


def backend_name():
    """Name of the kernel backend in use: 'native' or 'python'."""
    return _active


def available_backends():
    return tuple(sorted(_IMPLS))


def set_backend(name):
    """Switch kernel backends (mainly for tests and benchmarks)."""
    global _active
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = name


def get_impl(name=None):
    return _IMPLS[name or _active]


def scatter(indices, values, size):
    """Segmented sum out[i] = sum(values[k] for k with indices[k] == i).

    Summation order is ascending input position, which makes the result
    reproducible across backends and thread counts.
    """
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if indices.shape != values.shape or indices.ndim != 1:
        raise ValueError("indices and values must be 1-d arrays of equal length")
    size = int(size)
    if size < 0:
        raise ValueError("size must be nonnegative")
    if indices.size and (indices.min() < 0 or indices.max() >= size):
        raise IndexError("scatter index out of range")
    return _IMPLS[_active].scatter_sum(indices, values, size)
