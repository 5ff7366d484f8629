"""Pure-Python face-scan kernel (exact, arbitrary precision).

``face_cofactors`` returns the signed maximal minors of an (d-1) x d
integer block: ``cof[j] = (-1)**j * det(block with column j removed)``.
Appending a border row on top of the block makes a d x d matrix whose
determinant is ``border . cof``, so one cofactor vector per candidate
face serves every orientation test and the inequality extraction.
"""

from __future__ import annotations

from typing import Sequence

from .intlinalg import bareiss_determinant


def face_cofactors(block: Sequence[Sequence[int]]) -> list[int] | None:
    """Signed maximal minors of the block; None when its rank is deficient."""
    rows = [[int(v) for v in row] for row in block]
    width = len(rows) + 1
    if any(len(row) != width for row in rows):
        raise ValueError("block must have one more column than rows")
    cof: list[int] = []
    for j in range(width):
        minor = [row[:j] + row[j + 1 :] for row in rows]
        det = bareiss_determinant(minor)
        cof.append(det if j % 2 == 0 else -det)
    if not any(cof):
        return None
    return cof
