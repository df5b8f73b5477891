"""Pick the compiled kernels when built, else the pure-Python ones.

Set ``BELGATREE_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

pure = _pykernels
kernels = _pykernels
compiled = None

if not os.environ.get("BELGATREE_PURE"):
    try:
        from . import _ckernels as compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled = None
    else:
        kernels = compiled

NAME = kernels.NAME
