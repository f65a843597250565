"""Backend selection for the batched hot loops.

The compiled extension is used when it imports cleanly.  Setting the
environment variable ``RISSIM_BACKEND=python`` forces the numpy fallback,
``RISSIM_BACKEND=cython`` makes a missing extension an error.
"""

import os

from rissim import _pykernels

__all__ = ["BACKEND", "cosine_angles", "compose", "ml_detect", "get_backend"]


def get_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from rissim import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    requested = os.environ.get("RISSIM_BACKEND", "").strip().lower()
    if requested in ("python", "cython"):
        return requested, get_backend(requested)
    try:
        return "cython", get_backend("cython")
    except ImportError:
        return "python", _pykernels


BACKEND, _impl = _select()

cosine_angles = _impl.cosine_angles
compose = _impl.compose
ml_detect = _impl.ml_detect
