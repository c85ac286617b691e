"""Kernel backend selection.

The hot kernels (chain sweeps, manipulability gradient, ADMM iterations)
exist twice: compiled Cython extensions and pure-numpy fallbacks with
identical signatures. The compiled ones are used when importable; set
IK_BENCH_BACKEND=python or =compiled to force a choice. Core code calls
through `kin()` / `qpk()` so tests and benchmarks can switch at runtime.
"""

from __future__ import annotations

import os

from . import _kin_py, _qp_py

try:
    from . import _kin_cy, _qp_cy

    HAVE_COMPILED = True
except ImportError:
    _kin_cy = None
    _qp_cy = None
    HAVE_COMPILED = False

_BACKENDS = {
    "python": (_kin_py, _qp_py),
    "compiled": (_kin_cy, _qp_cy),
}


def _initial() -> str:
    requested = os.environ.get("IK_BENCH_BACKEND", "auto").lower()
    if requested in ("", "auto"):
        return "compiled" if HAVE_COMPILED else "python"
    if requested not in _BACKENDS:
        raise ValueError(f"IK_BENCH_BACKEND must be auto, python or compiled, got {requested!r}")
    if requested == "compiled" and not HAVE_COMPILED:
        raise ImportError("IK_BENCH_BACKEND=compiled but the compiled kernels are not built")
    return requested


_active = _initial()


def use(name: str) -> None:
    """Switch the active backend (mainly for tests and benchmarks)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and not HAVE_COMPILED:
        raise ImportError("compiled kernels are not built")
    _active = name


def backend_name() -> str:
    return _active


def kin():
    return _BACKENDS[_active][0]


def qpk():
    return _BACKENDS[_active][1]
