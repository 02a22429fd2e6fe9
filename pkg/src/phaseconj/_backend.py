"""Select the sampling kernel implementation at import time.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback. Set ``PHASECONJ_BACKEND=python`` to force the fallback.
"""

import importlib
import os

BACKENDS = ("cython", "python")


def load(name):
    if name == "cython":
        return importlib.import_module("phaseconj._kernels")
    if name == "python":
        return importlib.import_module("phaseconj._kernels_py")
    raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")


def available():
    names = []
    for name in BACKENDS:
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select():
    forced = os.environ.get("PHASECONJ_BACKEND", "").strip().lower()
    if forced:
        return forced, load(forced)
    try:
        return "cython", load("cython")
    except ImportError:
        return "python", load("python")


NAME, kernels = _select()
