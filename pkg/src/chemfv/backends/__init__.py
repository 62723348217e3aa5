"""Kernel backend selection.

The compiled Cython kernels are used when available; the pure-numpy
reference implementation is the fallback. Set CHEMFV_BACKEND=reference or
CHEMFV_BACKEND=compiled to force a choice (forcing `compiled` without the
extension built is an error).
"""

import os

from . import reference

try:
    from . import _kernels as compiled
    HAVE_COMPILED = True
except ImportError:
    compiled = None
    HAVE_COMPILED = False


def get_backend(name=None):
    """Resolve a backend module by name, or the default for None."""
    if name is None:
        name = os.environ.get("CHEMFV_BACKEND", "")
    name = name.lower()
    if name in ("", "auto"):
        return compiled if HAVE_COMPILED else reference
    if name == "reference":
        return reference
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled backend requested but not built")
        return compiled
    raise ValueError(f"unknown backend {name!r}")


active = get_backend()
