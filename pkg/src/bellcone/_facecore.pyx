# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled face-scan kernel.

Same contract as the pure fallback: signed maximal minors of an
(d-1) x d integer block.  Storage is int64 with 128-bit intermediates;
any value outside +-2**62 reports overflow so the caller can redo the
block on the exact arbitrary-precision path.
"""

from libc.stdlib cimport free, malloc

cdef extern from *:
    ctypedef long long int128 "__int128"

ctypedef long long i64

cdef i64 LIMIT = (<i64>1) << 62


cdef int _bareiss_i64(i64* m, int n, i64* out_det) nogil:
    """Determinant of an n x n int64 matrix; 1 on success, 0 on overflow."""
    cdef int i, j, k, piv
    cdef i64 pivot, factor, prev, tmp
    cdef int128 acc
    cdef int sign = 1
    if n == 0:
        out_det[0] = 1
        return 1
    prev = 1
    for k in range(n - 1):
        piv = -1
        for i in range(k, n):
            if m[i * n + k] != 0:
                piv = i
                break
        if piv < 0:
            out_det[0] = 0
            return 1
        if piv != k:
            for j in range(n):
                tmp = m[k * n + j]
                m[k * n + j] = m[piv * n + j]
                m[piv * n + j] = tmp
            sign = -sign
        pivot = m[k * n + k]
        for i in range(k + 1, n):
            factor = m[i * n + k]
            for j in range(k + 1, n):
                acc = <int128>pivot * m[i * n + j] - <int128>factor * m[k * n + j]
                acc = acc / prev
                if acc > LIMIT or acc < -LIMIT:
                    return 0
                m[i * n + j] = <i64>acc
            m[i * n + k] = 0
        prev = pivot
    out_det[0] = sign * m[(n - 1) * n + (n - 1)]
    return 1


def face_cofactors_i64(const i64[:, ::1] block):
    """Return (cofactors list | None, status); status 0 ok, 1 overflow."""
    cdef int n = block.shape[0]
    cdef int width = block.shape[1]
    cdef int i, j, col, dst
    cdef i64 det
    cdef i64 value
    if width != n + 1:
        raise ValueError("block must have one more column than rows")
    for i in range(n):
        for j in range(width):
            value = block[i, j]
            if value > LIMIT or value < -LIMIT:
                return None, 1
    cdef i64* work = <i64*> malloc(n * n * sizeof(i64))
    cdef i64* cof = <i64*> malloc(width * sizeof(i64))
    if work == NULL or cof == NULL:
        free(work)
        free(cof)
        raise MemoryError()
    cdef int ok = 1
    cdef int nonzero = 0
    try:
        with nogil:
            for col in range(width):
                for i in range(n):
                    dst = 0
                    for j in range(width):
                        if j != col:
                            work[i * n + dst] = block[i, j]
                            dst += 1
                ok = _bareiss_i64(work, n, &det)
                if not ok:
                    break
                cof[col] = det if col % 2 == 0 else -det
                if det != 0:
                    nonzero = 1
        if not ok:
            return None, 1
        if not nonzero:
            return None, 0
        return [cof[j] for j in range(width)], 0
    finally:
        free(work)
        free(cof)
