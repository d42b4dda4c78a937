"""Hot-loop kernels with a compiled fast path.

The compiled extension is optional: when it failed to build or is missing
(or EVENTFIT_PURE_KERNELS is set), the pure-Python twin is selected at
import time. `BACKEND` records which one is active; `backends()` exposes
every available implementation so tests and benchmarks can compare them.
"""

import os

from . import pure

try:
    from . import _native
except ImportError:  # extension not built
    _native = None

if _native is not None and not os.environ.get("EVENTFIT_PURE_KERNELS"):
    _impl = _native
    BACKEND = "native"
else:
    _impl = pure
    BACKEND = "pure"

harvest_lines = _impl.harvest_lines
assoc_scores = _impl.assoc_scores


def backends():
    """Name -> module for every importable kernel implementation."""
    found = {"pure": pure}
    if _native is not None:
        found["native"] = _native
    return found
