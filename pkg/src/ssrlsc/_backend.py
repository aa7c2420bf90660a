"""Kernel backend selection.

The compiled extension is used when importable. Setting the environment
variable ``SSRLSC_PURE_PYTHON=1`` forces the numpy fallback.
"""

import importlib
import os

from . import _fallback


def _load_compiled():
    try:
        return importlib.import_module("ssrlsc._kernels")
    except ImportError:
        return None


_compiled = None if os.environ.get("SSRLSC_PURE_PYTHON") else _load_compiled()

kernels = _compiled if _compiled is not None else _fallback
BACKEND = "cython" if _compiled is not None else "python"


def available():
    """Names of the backends usable in this process."""
    names = ["python"]
    if _compiled is not None or _load_compiled() is not None:
        names.insert(0, "cython")
    return names


def get(name=None):
    """Return the kernel module for ``name`` (``"cython"``/``"python"``) or the default."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "cython":
        mod = _compiled or _load_compiled()
        if mod is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return mod
    raise ValueError(f"unknown backend {name!r}")
