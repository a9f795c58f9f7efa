"""Hot numeric kernels with two interchangeable backends.

The numba backend JIT-compiles the inner loops; the numpy backend is pure
vectorized/stdlib Python. Selection:

    DCGLAB_KERNELS=numba   force numba (ImportError if unavailable)
    DCGLAB_KERNELS=numpy   force the pure-numpy fallback
    unset / auto           numba if importable, else numpy

Both backends are bit-identical: same labels, same modes, same RNG stream
consumption. ``benchmarks/bench_kernels.py`` compares their throughput.
"""

import os

_choice = os.environ.get("DCGLAB_KERNELS", "auto").lower()

if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"DCGLAB_KERNELS must be auto|numba|numpy, got {_choice!r}")

if _choice == "numpy":
    from . import numpy_impl as _impl
    BACKEND = "numpy"
elif _choice == "numba":
    from . import numba_impl as _impl
    BACKEND = "numba"
else:
    try:
        from . import numba_impl as _impl
        BACKEND = "numba"
    except ImportError:
        from . import numpy_impl as _impl
        BACKEND = "numpy"

mode_codes = _impl.mode_codes
label_components = _impl.label_components
advance_objects = _impl.advance_objects


def get_backend(name: str):
    """Explicit backend module, for tests and benchmarks."""
    if name == "numpy":
        from . import numpy_impl
        return numpy_impl
    if name == "numba":
        from . import numba_impl
        return numba_impl
    raise ValueError(name)
