"""Kernel selection: compiled extension if importable, pure Python otherwise.

Set SPCSIM_PURE_PYTHON=1 to force the fallback (used by the parity tests and
the kernel benchmark).  Both implementations are bit-identical, so the choice
never changes results, only speed.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SPCSIM_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION
run_colony = _impl.run_colony
token_edit_distance = _impl.token_edit_distance
