"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``LIEBDARBOUX_PURE=1`` is set, the numpy fallback is
used.  ``BACKEND`` names the active one.
"""
from __future__ import annotations

import importlib.util
import os

from . import _pykernels

if os.environ.get("LIEBDARBOUX_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
log_derivative = _impl.log_derivative
inverse_det = _impl.inverse_det
eigvalsh3 = _impl.eigvalsh3
integrate_reduced = _impl.integrate_reduced

__all__ = ["BACKEND", "log_derivative", "inverse_det", "eigvalsh3", "integrate_reduced",
           "compiled_available"]


def compiled_available() -> bool:
    return importlib.util.find_spec(f"{__package__}._ckernels") is not None
