"""Kernel selection: the compiled extension when it is importable, else Python.

Set ``GCMERGE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from typing import Sequence

from . import _shuffle_py

try:
    if os.environ.get("GCMERGE_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _shuffle_ext
except ImportError:
    _shuffle_ext = None

BACKEND = "cython" if _shuffle_ext is not None else "python"


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _shuffle_ext is not None else [])


def decompose(
    word: Sequence[int],
    words: Sequence[Sequence[int]],
    m: int,
    strict: bool,
    backend: str | None = None,
) -> list[tuple[int, int]] | None:
    backend = backend or BACKEND
    if backend == "cython":
        if _shuffle_ext is None:
            raise RuntimeError("compiled kernel is not built")
        maxlen = max((len(w) for w in words), default=1)
        if _shuffle_ext.fits(len(word), m, len(words), maxlen):
            return _shuffle_ext.decompose(list(word), [list(w) for w in words], m, strict)
    elif backend != "python":
        raise ValueError(f"unknown backend {backend!r}")
    return _shuffle_py.decompose(word, words, m, strict)
