"""Backend agreement: the compiled minors kernel versus the exact fallback."""

import random

import numpy as np
import pytest

from bellcone import _facepure, facecore


def random_block(rng, rows, lo=-9, hi=9):
    return [[rng.randint(lo, hi) for _ in range(rows + 1)] for _ in range(rows)]


def test_backend_reports_a_name():
    assert facecore.BACKEND in ("compiled", "pure")


def test_agreement_on_random_blocks():
    rng = random.Random(101)
    for _ in range(200):
        block = random_block(rng, rng.randint(1, 7))
        assert facecore.face_cofactors(block) == _facepure.face_cofactors(block)


def test_agreement_on_rank_deficient_blocks():
    rng = random.Random(103)
    for _ in range(50):
        n = rng.randint(2, 6)
        block = random_block(rng, n)
        block[-1] = block[0][:]  # duplicate row: every maximal minor vanishes
        assert facecore.face_cofactors(block) is None
        assert _facepure.face_cofactors(block) is None


def test_huge_entries_fall_back_to_exact_path():
    big = 2**70
    block = [[big, 1, 0], [0, 1, big]]
    expected = _facepure.face_cofactors(block)
    assert facecore.face_cofactors(block) == expected


def test_overflowing_intermediates_fall_back():
    # Values fit int64 but the minors overflow the safety margin.
    rng = random.Random(107)
    block = [[rng.randint(2**55, 2**60) for _ in range(9)] for _ in range(8)]
    assert facecore.face_cofactors(block) == _facepure.face_cofactors(block)


def test_numpy_input_accepted():
    block = np.array([[1, 2, 3], [4, 5, 6]], dtype=np.int64)
    assert facecore.face_cofactors(block) == _facepure.face_cofactors(block)


def test_cofactors_define_border_determinants():
    # Appending a border row gives a square matrix whose determinant is the
    # dot product with the cofactors.
    from bellcone.intlinalg import bareiss_determinant

    rng = random.Random(109)
    for _ in range(40):
        n = rng.randint(1, 6)
        block = random_block(rng, n)
        cof = facecore.face_cofactors(block)
        if cof is None:
            continue
        border = [rng.randint(-9, 9) for _ in range(n + 1)]
        direct = bareiss_determinant([border] + block)
        assert direct == sum(b * c for b, c in zip(border, cof))


def test_shape_validation():
    with pytest.raises(ValueError):
        facecore.face_cofactors([[1, 2], [3, 4]])  # needs one more column
