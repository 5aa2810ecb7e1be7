"""Inner-LP kernel with a compiled fast path and a pure-python fallback.

The backend is chosen once at import time. Set POLYNEST_KERNEL=python or
POLYNEST_KERNEL=compiled to force one; "compiled" raises if the extension
was not built. Both backends implement the identical algorithm and agree to
floating-point roundoff.
"""
import os

from ._errors import LpDegenerate, LpError, LpInfeasible, LpUnbounded

_choice = os.environ.get("POLYNEST_KERNEL", "auto").strip().lower()
if _choice not in ("auto", "compiled", "python"):
    raise ImportError(f"POLYNEST_KERNEL must be auto, compiled or python, not {_choice!r}")

if _choice == "python":
    from . import _simplex_py as _impl
else:
    try:
        from . import _simplex as _impl
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _simplex_py as _impl

lp_maximize = _impl.lp_maximize


def backend() -> str:
    """Name of the active backend: "compiled" or "python"."""
    return _impl.BACKEND


def load_backend(name: str):
    """Return the lp_maximize of a specific backend (for benchmarks/tests)."""
    if name == "python":
        from . import _simplex_py
        return _simplex_py.lp_maximize
    if name == "compiled":
        from . import _simplex
        return _simplex.lp_maximize
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "lp_maximize", "backend", "load_backend",
    "LpError", "LpInfeasible", "LpUnbounded", "LpDegenerate",
]
