"""Kernel backend selection.

The compiled extension is preferred when present; the numpy fallback is used
otherwise, or when ORLICZ_KIT_PURE is set in the environment.  Both backends
expose the identical module surface (family codes, phi_array,
weighted_modular, luxemburg_root).
"""
import os

from . import pure as _pure

if os.environ.get("ORLICZ_KIT_PURE"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND

POWER = _pure.POWER
EXP_MINUS = _pure.EXP_MINUS
POWER_LOG = _pure.POWER_LOG
TABULATED = _pure.TABULATED

phi_array = _impl.phi_array
weighted_modular = _impl.weighted_modular
luxemburg_root = _impl.luxemburg_root

__all__ = [
    "BACKEND", "POWER", "EXP_MINUS", "POWER_LOG", "TABULATED",
    "phi_array", "weighted_modular", "luxemburg_root",
]
