"""Split-kernel selection: compiled extension if available, NumPy otherwise.

Set PROBESEL_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the kernel-parity tests).
"""

import os

if os.environ.get("PROBESEL_PURE_PYTHON"):
    from . import _split_py as _impl

    COMPILED = False
else:
    try:
        from . import _split_fast as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _split_py as _impl

        COMPILED = False

best_split = _impl.best_split
