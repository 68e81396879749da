"""Numerical core: compiled extension when available, NumPy fallback otherwise.

Set ``RHL_FORCE_FALLBACK=1`` to skip the extension (used by the parity tests
and as an escape hatch on platforms without a working build).
"""
import os

from . import fallback

KIND_PARETO = fallback.KIND_PARETO
KIND_EXP = fallback.KIND_EXP
KIND_EXPSUM = fallback.KIND_EXPSUM
UniformBuffer = fallback.UniformBuffer

if os.environ.get("RHL_FORCE_FALLBACK") == "1":
    _impl = fallback
    COMPILED = False
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        _impl = fallback
        COMPILED = False

resolvent_forward = _impl.resolvent_forward
riccati_forward = _impl.riccati_forward
riccati_exponent_forward = _impl.riccati_exponent_forward
volterra_path = _impl.volterra_path
hawkes_thinning = _impl.hawkes_thinning
