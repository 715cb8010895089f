"""Backend selection for the step loop.

The compiled kernel is used when it imports; otherwise the pure-Python
loop. Set ``DEALER_SIM_BACKEND=python`` (or ``cython``) to force one.
"""

from __future__ import annotations

import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKENDS = {"python": _pykernel}
if _ckernel is not None:
    BACKENDS["cython"] = _ckernel


def _select():
    wanted = os.environ.get("DEALER_SIM_BACKEND", "auto").lower()
    if wanted == "auto":
        return _ckernel if _ckernel is not None else _pykernel
    if wanted not in BACKENDS:
        raise ImportError(
            f"DEALER_SIM_BACKEND={wanted!r} is not available; built backends: {sorted(BACKENDS)}")
    return BACKENDS[wanted]


_active = _select()
BACKEND = _active.BACKEND


def get_backend(name: str | None = None):
    """Return the kernel module for ``name``, or the active one."""
    if name is None:
        return _active
    return BACKENDS[name]


def run_loop(*args, backend: str | None = None, **kwargs):
    return get_backend(backend).run_loop(*args, **kwargs)
