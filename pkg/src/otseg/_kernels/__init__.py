"""Kernel backend selection.

The hot kernels exist twice: a Cython extension (``_core``) and a pure
NumPy/Python fallback (``_core_py``) with identical semantics.  The compiled
backend is preferred when importable; set ``OTSEG_BACKEND=python`` or
``OTSEG_BACKEND=compiled`` to force one.  ``benchmarks/compare_backends.py``
measures the difference.
"""

import os

_requested = os.environ.get("OTSEG_BACKEND", "auto").lower()
if _requested not in ("auto", "compiled", "python"):
    raise ValueError(f"OTSEG_BACKEND must be auto/compiled/python, got {_requested!r}")

if _requested == "python":
    from . import _core_py as impl
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _core_py as impl

BACKEND = impl.BACKEND_NAME

slic_assign = impl.slic_assign
power_assign = impl.power_assign
assign_bins = impl.assign_bins
label_components = impl.label_components
solve_transport = impl.solve_transport


def available_backends():
    names = []
    try:
        from . import _core  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    names.append("python")
    return names


def get_backend(name):
    """Return the kernel module for an explicit backend name."""
    if name in ("compiled", "cython"):
        from . import _core

        return _core
    if name in ("python", "numpy"):
        from . import _core_py

        return _core_py
    raise ValueError(f"unknown backend {name!r}")
