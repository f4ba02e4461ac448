"""Pure-Python GF(2) elimination, used when the compiled kernel is absent.

Rows are held as Python integers so XOR of whole rows is a single op.
"""

import numpy as np


def rref_packed(a, ncols):
    m, w = a.shape
    rows = [int.from_bytes(a[i].tobytes(), "little") for i in range(m)]
    pivots = []
    rank = 0
    for col in range(ncols):
        if rank == m:
            break
        bit = 1 << col
        r = rank
        while r < m and not rows[r] & bit:
            r += 1
        if r == m:
            continue
        rows[r], rows[rank] = rows[rank], rows[r]
        p = rows[rank]
        for i in range(m):
            if i != rank and rows[i] & bit:
                rows[i] ^= p
        pivots.append(col)
        rank += 1
    nbytes = 8 * w
    for i in range(m):
        a[i] = np.frombuffer(rows[i].to_bytes(nbytes, "little"), dtype="<u8")
    return rank, np.asarray(pivots, dtype=np.intp)
