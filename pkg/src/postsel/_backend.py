"""Pick the kernel implementation once, at import.

Set ``POSTSEL_PURE_PYTHON=1`` to force the numpy fallback even when the
compiled extension is importable.
"""
import os

from . import _kernels_py

if os.environ.get("POSTSEL_PURE_PYTHON") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND
jacobi_eigh = kernels.jacobi_eigh
mc_counts = kernels.mc_counts
mix64 = kernels.mix64

__all__ = ["BACKEND", "jacobi_eigh", "mc_counts", "mix64", "kernels"]
