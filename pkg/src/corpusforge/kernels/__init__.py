"""Kernel backend selection.

Imports the compiled extension when available, otherwise falls back to the
pure-Python implementations. Set CORPUSFORGE_PURE_PYTHON=1 to force the
fallback (used by the parity tests and the benchmark).
"""

import os

from corpusforge.kernels import pure
from corpusforge.kernels.pure import BEAD_DELTAS

if os.environ.get("CORPUSFORGE_PURE_PYTHON") == "1":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from corpusforge import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

length_cost = _impl.length_cost
gc_fill = _impl.gc_fill
edit_distance = _impl.edit_distance

__all__ = ["BACKEND", "BEAD_DELTAS", "length_cost", "gc_fill", "edit_distance", "pure"]
