"""Kernel selection: the compiled extension when available, else pure Python.

Set ``CODEBENCH_PURE=1`` to force the pure-Python kernels.
"""
from __future__ import annotations

import os

from . import _kernels_py as pure

if os.environ.get("CODEBENCH_PURE") == "1":
    _impl = pure
    COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        _impl = pure
        COMPILED = False

greedy_segment = _impl.greedy_segment
count_substrings = _impl.count_substrings
overlap = _impl.overlap
similar_among = _impl.similar_among

IMPLEMENTATIONS = {"pure": pure}
if COMPILED:
    IMPLEMENTATIONS["compiled"] = _impl
