"""Backend and worker-count selection.

PROGENY_BACKEND=numba forces the compiled kernel (error if numba is not
importable), =numpy forces the pure-Python engine; unset/auto picks numba
when available.  Results are identical either way by contract (the
cross-backend tests assert it bitwise), so the flag only trades speed.

PROGENY_THREADS overrides the worker count used for ensemble runs; the
reduction is replicate-index-ordered, so worker count never changes
results.
"""

from __future__ import annotations

import os

_BACKEND_ENV = "PROGENY_BACKEND"
_THREADS_ENV = "PROGENY_THREADS"


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def resolve_backend(explicit: str | None = None) -> str:
    choice = (explicit or os.environ.get(_BACKEND_ENV, "") or "auto").strip().lower()
    if choice in ("numba", "jit"):
        if not numba_available():
            raise RuntimeError("PROGENY_BACKEND=numba but numba is not importable")
        return "numba"
    if choice in ("numpy", "python", "pure"):
        return "numpy"
    if choice == "auto":
        return "numba" if numba_available() else "numpy"
    raise ValueError(f"unknown backend {choice!r}; use 'numba', 'numpy' or 'auto'")


def resolve_workers(explicit: int | None = None) -> int:
    if explicit is not None:
        if explicit < 1:
            raise ValueError("worker count must be >= 1")
        return explicit
    env = os.environ.get(_THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{_THREADS_ENV} must be >= 1, got {n}")
        return n
    return min(8, os.cpu_count() or 1)
