"""Kernel backend selection.

The compiled extension is used when it imports; setting
``VOLBENCH_PURE_PYTHON=1`` forces the NumPy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = None if os.environ.get("VOLBENCH_PURE_PYTHON") else _load_compiled()

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

BACKEND = "compiled" if _compiled is not None else "python"
_active = BACKENDS[BACKEND]


def get_backend(name=None):
    return _active if name is None else BACKENDS[name]


def run_batch(*args, backend=None):
    return get_backend(backend).run_batch(*args)


def probabilities(states, backend=None):
    return get_backend(backend).probabilities(states)
