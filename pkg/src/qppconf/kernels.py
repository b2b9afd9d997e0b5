"""Scoring-kernel backend selection.

The compiled extension is used when importable; set ``QPPCONF_PURE_PYTHON=1``
to force the pure-Python fallback.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

_MODULES = {"cython": "qppconf._ckernels", "python": "qppconf._pykernels"}


def load_backend(name: str) -> ModuleType:
    return importlib.import_module(_MODULES[name])


def available_backends() -> list[str]:
    out = []
    for name in _MODULES:
        try:
            load_backend(name)
        except ImportError:
            continue
        out.append(name)
    return out


if os.environ.get("QPPCONF_PURE_PYTHON"):
    BACKEND = "python"
else:
    BACKEND = "cython" if "cython" in available_backends() else "python"

_impl = load_backend(BACKEND)
score_postings = _impl.score_postings
