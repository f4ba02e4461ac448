# cython: boundscheck=False, wraparound=False, cdivision=True
"""Packed-bit GF(2) elimination (compiled kernel)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()


def rref_packed(uint64_t[:, ::1] a, Py_ssize_t ncols):
    """Reduce ``a`` in place to reduced row echelon form.

    Pivots are searched only in the first ``ncols`` columns, but row
    operations act on the full packed rows. Returns ``(rank, pivots)``.
    """
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef Py_ssize_t rank = 0, col, r, i, k, wo
    cdef uint64_t bit, tmp
    pivots = np.empty(min(m, ncols), dtype=np.intp)
    cdef Py_ssize_t[::1] piv = pivots
    for col in range(ncols):
        if rank == m:
            break
        wo = col >> 6
        bit = (<uint64_t>1) << (col & 63)
        r = rank
        while r < m and not (a[r, wo] & bit):
            r += 1
        if r == m:
            continue
        if r != rank:
            for k in range(wo, w):
                tmp = a[r, k]
                a[r, k] = a[rank, k]
                a[rank, k] = tmp
        for i in range(m):
            if i != rank and (a[i, wo] & bit):
                for k in range(wo, w):
                    a[i, k] ^= a[rank, k]
        piv[rank] = col
        rank += 1
    return rank, pivots[:rank].copy()
