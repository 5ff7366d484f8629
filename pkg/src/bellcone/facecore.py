"""Backend selection for the face-scan kernel.

The compiled extension is preferred when it imported successfully and the
operands fit 64-bit storage; any overflow falls back, per call, to the
exact pure-Python path, so results are always exact.  Set BELLCONE_PURE=1
to force the fallback (used by the benchmark and the backend tests).
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from . import _facepure

_compiled = None
if not os.environ.get("BELLCONE_PURE"):
    try:
        from . import _facecore as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "pure"

_I64_SAFE = 2**62


def face_cofactors(block: Sequence[Sequence[int]] | np.ndarray) -> list[int] | None:
    """Signed maximal minors of an (d-1) x d integer block.

    Returns None when the block has deficient rank (the candidate spans
    too small a subspace to support a hyperplane).
    """
    if _compiled is not None:
        arr = _as_i64(block)
        if arr is not None:
            cof, status = _compiled.face_cofactors_i64(arr)
            if status == 0:
                return cof
    return _facepure.face_cofactors(_as_lists(block))


def _as_i64(block) -> np.ndarray | None:
    try:
        arr = np.ascontiguousarray(block, dtype=np.int64)
    except OverflowError:
        return None
    if arr.size and np.abs(arr).max() > _I64_SAFE:
        return None
    return arr


def _as_lists(block) -> list[list[int]]:
    if isinstance(block, np.ndarray):
        return [[int(v) for v in row] for row in block]
    return [[int(v) for v in row] for row in block]
