"""Monte-Carlo kernel selection: compiled extension with numpy fallback.

The environment variable SPHINT_BACKEND forces a choice:
  auto (default) - compiled kernel if importable, else numpy
  compiled       - compiled kernel or ImportError
  python         - numpy fallback
"""

from __future__ import annotations

import os

from . import _mc_numpy

_choice = os.environ.get("SPHINT_BACKEND", "auto").lower()

if _choice not in ("auto", "compiled", "python"):
    raise ValueError(f"SPHINT_BACKEND must be auto|compiled|python, got {_choice!r}")

if _choice == "python":
    kernel = _mc_numpy
else:
    try:
        from . import _mc_kernel as kernel  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "compiled":
            raise
        kernel = _mc_numpy

BACKEND = kernel.NAME


def available_backends():
    """The importable kernels, for benchmarking and cross-checks."""
    found = {"python": _mc_numpy}
    try:
        from . import _mc_kernel  # type: ignore[attr-defined]

        found["compiled"] = _mc_kernel
    except ImportError:
        pass
    return found
