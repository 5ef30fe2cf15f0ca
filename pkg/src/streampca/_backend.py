"""Kernel backend selection.

The hot per-step kernels exist twice: a compiled Cython extension
(``streampca._kernels``) and a pure-numpy fallback
(``streampca._kernels_py``). The compiled one is picked at import when
available; ``STREAMPCA_BACKEND=python|cython|auto`` overrides the choice.
"""

import os

from . import _kernels_py

_IMPLS = {"python": _kernels_py}

try:
    from . import _kernels
    _IMPLS["cython"] = _kernels
except ImportError:
    _kernels = None


def _resolve(name):
    if name == "auto":
        return "cython" if "cython" in _IMPLS else "python"
    if name not in _IMPLS:
        available = ", ".join(sorted(_IMPLS))
        raise ValueError(f"unknown backend {name!r} (available: {available})")
    return name


BACKEND = _resolve(os.environ.get("STREAMPCA_BACKEND", "auto"))
_active = _IMPLS[BACKEND]


def available_backends():
    """Names of the backends importable in this environment."""
    return sorted(_IMPLS)


def use_backend(name):
    """Switch the active kernel backend; returns the previous backend name."""
    global _active, BACKEND
    previous = BACKEND
    BACKEND = _resolve(name)
    _active = _IMPLS[BACKEND]
    return previous


def active():
    """The module implementing the currently selected kernels."""
    return _active
