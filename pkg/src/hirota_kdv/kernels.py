"""Backend selection for the integer kernels.

The compiled extension is used when importable; set ``HIROTA_KDV_PURE=1`` to
force the pure-Python implementation.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("HIROTA_KDV_PURE"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

bareiss_echelon = _impl.bareiss_echelon
bareiss_rank = _impl.bareiss_rank
jacobi_violations = _impl.jacobi_violations
sandwich = _impl.sandwich

__all__ = ["BACKEND", "bareiss_echelon", "bareiss_rank", "jacobi_violations", "sandwich"]
