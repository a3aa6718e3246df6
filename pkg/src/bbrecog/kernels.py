"""Kernel selection: the compiled module when importable, else pure Python.

Set ``BBRECOG_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as pure

compiled = None
if os.environ.get("BBRECOG_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

active = compiled if compiled is not None else pure
BACKEND = "cython" if compiled is not None else "python"

# moduli at or above this bound always go through the big-integer fallback
COMPILED_MODULUS_LIMIT = 1 << 63


def for_modulus(p: int):
    if compiled is not None and p < COMPILED_MODULUS_LIMIT:
        return compiled
    return pure
