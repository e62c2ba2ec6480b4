"""Select the compiled kernels when available, else the numpy fallback."""
from . import _pykernels

try:
    from . import _ckernels as kernels
    BACKEND = "cython"
except ImportError:  # extension not built
    kernels = _pykernels
    BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
