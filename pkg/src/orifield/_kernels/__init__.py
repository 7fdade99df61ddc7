"""Kernel selection: compiled extension if available, numpy fallback otherwise.

The only hot loop in the package is the direct spectral summation used for
fields whose amplitude varies per pixel (space-varying Hurst exponent and/or
cone direction); everything else is FFT-bound.  Both backends implement the
same contract and are compared by ``benchmarks/bench_varying_sum.py``.
"""

from . import _varying_np

try:
    from . import _varying_cy as _impl

    HAVE_COMPILED = True
except ImportError:
    _impl = _varying_np
    HAVE_COMPILED = False


def backend_name() -> str:
    return "cython" if HAVE_COMPILED else "numpy"


def varying_spectral_sum(*args, **kwargs):
    """Dispatch to the selected backend; see _varying_np for the contract."""
    return _impl.varying_spectral_sum(*args, **kwargs)


numpy_spectral_sum = _varying_np.varying_spectral_sum
