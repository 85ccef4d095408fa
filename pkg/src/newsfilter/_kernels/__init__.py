"""Split-search kernels: compiled extension when available, NumPy otherwise.

Set NEWSFILTER_KERNEL=python to force the fallback (used by the kernel
benchmark and the backend-equivalence tests). Both backends return identical
results, so the choice affects speed only.
"""

import os

from ._gini_py import gini_scan as gini_scan_py

try:
    from ._gini_cy import gini_scan as gini_scan_cy
except ImportError:
    gini_scan_cy = None

_forced = os.environ.get("NEWSFILTER_KERNEL", "auto").lower()

if _forced == "python" or gini_scan_cy is None:
    gini_scan = gini_scan_py
    BACKEND = "python"
else:
    gini_scan = gini_scan_cy
    BACKEND = "cython"

__all__ = ["gini_scan", "gini_scan_py", "gini_scan_cy", "BACKEND"]
