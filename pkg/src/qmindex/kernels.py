"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the NumPy
fallback is used.  Override with the environment variable
``QMINDEX_KERNELS``: ``c`` requires the extension (ImportError if missing),
``numpy`` forces the fallback, ``auto`` (default) picks the best available.
``BACKEND`` names the selection.
"""

from __future__ import annotations

import os

_requested = os.environ.get("QMINDEX_KERNELS", "auto")
if _requested not in ("auto", "c", "numpy"):
    raise ValueError(f"QMINDEX_KERNELS must be auto, c or numpy, got {_requested!r}")

if _requested in ("auto", "c"):
    try:
        from . import _ckernels as _impl
        BACKEND = "c"
    except ImportError:
        if _requested == "c":
            raise
        from . import _kernels_np as _impl
        BACKEND = "numpy"
else:
    from . import _kernels_np as _impl
    BACKEND = "numpy"

qdist_pair = _impl.qdist_pair
qdist_scan = _impl.qdist_scan
qdist_cross = _impl.qdist_cross
lb_enumerate = _impl.lb_enumerate
