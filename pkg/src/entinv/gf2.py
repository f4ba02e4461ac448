"""Dense GF(2) linear algebra on uint8 0/1 matrices.

The elimination kernel is the compiled ``_gf2`` extension when it is
importable and a pure-Python fallback otherwise. Set ``ENTINV_GF2=python``
to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _gf2_py

_KERNELS = {"python": _gf2_py.rref_packed}
try:
    from . import _gf2  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build
    _gf2 = None
else:
    _KERNELS["cython"] = _gf2.rref_packed

BACKEND = "cython" if "cython" in _KERNELS else "python"
if os.environ.get("ENTINV_GF2", "").lower() == "python":
    BACKEND = "python"
_rref_packed = _KERNELS[BACKEND]


def available_backends() -> list[str]:
    return sorted(_KERNELS)


def set_backend(name: str) -> None:
    global BACKEND, _rref_packed
    if name not in _KERNELS:
        raise ValueError(f"GF(2) backend {name!r} not available")
    BACKEND = name
    _rref_packed = _KERNELS[name]


def pack(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.uint8)
    m, n = mat.shape
    w = max(1, -(-n // 64))
    buf = np.zeros((m, 8 * w), dtype=np.uint8)
    if n:
        packed = np.packbits(mat, axis=1, bitorder="little")
        buf[:, : packed.shape[1]] = packed
    return np.ascontiguousarray(buf.view("<u8"))


def unpack(words: np.ndarray, n: int) -> np.ndarray:
    m = words.shape[0]
    if m == 0:
        return np.zeros((0, n), dtype=np.uint8)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return np.ascontiguousarray(bits[:, :n])


def rref(mat: np.ndarray, ncols: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form with lowest-index pivots.

    Only the first ``ncols`` columns are used as pivot candidates. Returns
    the reduced matrix (same shape, zero rows last) and the pivot columns.
    """
    mat = np.asarray(mat, dtype=np.uint8)
    m, n = mat.shape
    if ncols is None:
        ncols = n
    words = pack(mat)
    _, pivots = _rref_packed(words, ncols)
    return unpack(words, n), np.asarray(pivots, dtype=np.intp)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b`` mod 2. Goes through float BLAS, exact for inner sizes < 2**53."""
    prod = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def rank(mat: np.ndarray) -> int:
    mat = np.asarray(mat, dtype=np.uint8)
    if mat.size == 0:
        return 0
    return len(rref(mat)[1])


def row_basis(mat: np.ndarray) -> np.ndarray:
    """Independent rows spanning the row space (the nonzero RREF rows)."""
    mat = np.asarray(mat, dtype=np.uint8)
    if mat.shape[0] == 0:
        return mat.copy()
    red, piv = rref(mat)
    return red[: len(piv)]


def left_kernel(mat: np.ndarray) -> np.ndarray:
    """Basis (as rows) of ``{c : c @ mat = 0 mod 2}``."""
    mat = np.asarray(mat, dtype=np.uint8)
    m, n = mat.shape
    aug = np.concatenate([mat, np.eye(m, dtype=np.uint8)], axis=1)
    red, piv = rref(aug, ncols=n)
    return red[len(piv):, n:]


def solve_left(mat: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Some ``c`` with ``c @ mat = b`` over GF(2), or None."""
    mat = np.asarray(mat, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8).reshape(1, -1)
    m = mat.shape[0]
    ker = left_kernel(np.concatenate([mat, b], axis=0))
    hits = np.nonzero(ker[:, m])[0]
    if len(hits) == 0:
        return None
    return ker[hits[0], :m].copy()


def solve_right(mat: np.ndarray, y: np.ndarray) -> np.ndarray | None:
    """Some ``x`` with ``mat @ x = y`` over GF(2), or None."""
    return solve_left(np.asarray(mat, dtype=np.uint8).T, y)


def in_span(mat: np.ndarray, v: np.ndarray) -> bool:
    mat = np.asarray(mat, dtype=np.uint8)
    if mat.shape[0] == 0:
        return not np.any(v)
    return solve_left(mat, v) is not None
