"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the pure-Python ``_pykernels`` module is used. Set ``QOT_PURE_PYTHON=1`` to
force the fallback.
"""
import os

from . import _pykernels

python_backend = _pykernels
compiled_backend = None

if os.environ.get("QOT_PURE_PYTHON", "") not in ("", "0"):
    backend = _pykernels
else:
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None
    backend = compiled_backend or _pykernels

BACKEND = backend.NAME
density_setting = backend.density_setting
count_gains = backend.count_gains
bnb_search = backend.bnb_search
