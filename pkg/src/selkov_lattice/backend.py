"""Numba/numpy backend selection for the hot integration kernels.

The environment variable ``SELKOV_LATTICE_BACKEND`` picks the kernel
implementation: ``numba`` (default when importable) or ``numpy``.
Both backends perform the identical arithmetic in the identical order,
so results agree bitwise; see ``bench.py`` for a speed comparison.
"""

from __future__ import annotations

import os

_ENV_VAR = "SELKOV_LATTICE_BACKEND"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


def backend_name() -> str:
    """Resolve the active backend from the environment."""
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not HAS_NUMBA:
            raise RuntimeError(
                f"{_ENV_VAR}=numba requested but numba is not importable"
            )
        return choice
    return "numba" if HAS_NUMBA else "numpy"
