"""Kernel selection: compiled extension if available, pure Python otherwise.

Set ``BLOCKDL_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and equivalence tests).
"""

import os

if os.environ.get("BLOCKDL_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

IMPLEMENTATION: str = _impl.IMPLEMENTATION
local_sweep = _impl.local_sweep
metropolis = _impl.metropolis
