"""Stage kernels for the spectral stepper, compiled when available.

The Cython module and the numpy fallback implement the same six fused
elementwise operations with the identical floating-point evaluation
tree, so results are bitwise reproducible whichever backend loads.
Set KDVDELTA_FORCE_FALLBACK=1 to skip the compiled module (used by the
equivalence test and the benchmark).
"""

import os

from . import _fallback

BACKEND = "fallback"
_impl = _fallback

if os.environ.get("KDVDELTA_FORCE_FALLBACK", "") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        pass

square_real = _impl.square_real
scale_spectrum = _impl.scale_spectrum
stage_b_in = _impl.stage_b_in
stage_c_in = _impl.stage_c_in
stage_d_in = _impl.stage_d_in
rk_combine = _impl.rk_combine

__all__ = [
    "BACKEND", "square_real", "scale_spectrum", "stage_b_in",
    "stage_c_in", "stage_d_in", "rk_combine",
]
