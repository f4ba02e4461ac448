import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from entinv import gf2

mats = st.integers(1, 12).flatmap(
    lambda m: st.integers(1, 140).flatmap(lambda n: arrays(np.uint8, (m, n), elements=st.integers(0, 1)))
)


def _rank_reference(a):
    a = a.copy().astype(np.uint8)
    r = 0
    for c in range(a.shape[1]):
        rows = [i for i in range(r, a.shape[0]) if a[i, c]]
        if not rows:
            continue
        a[[r, rows[0]]] = a[[rows[0], r]]
        for i in range(a.shape[0]):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


@given(mats)
def test_rank_matches_reference(a):
    assert gf2.rank(a) == _rank_reference(a)


@given(mats)
def test_backends_agree(a):
    out = {}
    for name in gf2.available_backends():
        gf2.set_backend(name)
        out[name] = gf2.rref(a)
    gf2.set_backend("cython" if "cython" in gf2.available_backends() else "python")
    ref = next(iter(out.values()))
    for red, piv in out.values():
        assert np.array_equal(red, ref[0]) and np.array_equal(piv, ref[1])


@given(mats)
def test_rref_is_reduced(a):
    red, piv = gf2.rref(a)
    for i, p in enumerate(piv):
        col = red[:, p]
        assert col[i] == 1 and col.sum() == 1
    assert not red[len(piv):].any()


@given(mats)
def test_left_kernel(a):
    ker = gf2.left_kernel(a)
    assert ker.shape[0] == a.shape[0] - gf2.rank(a)
    assert not gf2.matmul(ker, a).any()
    if ker.shape[0]:
        assert gf2.rank(ker) == ker.shape[0]


@given(mats, st.integers(0, 2**32 - 1))
def test_solve_left_and_span(a, seed):
    rng = np.random.default_rng(seed)
    c = rng.integers(0, 2, a.shape[0], dtype=np.uint8)
    b = gf2.matmul(c[None, :], a)[0]
    sol = gf2.solve_left(a, b)
    assert sol is not None and np.array_equal(gf2.matmul(sol[None, :], a)[0], b)
    assert gf2.in_span(a, b)


def test_solve_left_inconsistent():
    a = np.array([[1, 0, 0], [0, 1, 0]], dtype=np.uint8)
    assert gf2.solve_left(a, np.array([0, 0, 1], np.uint8)) is None
    assert not gf2.in_span(a, np.array([0, 0, 1], np.uint8))


def test_matmul_matches_integer_product():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, (30, 500), dtype=np.uint8)
    b = rng.integers(0, 2, (500, 40), dtype=np.uint8)
    assert np.array_equal(gf2.matmul(a, b), (a.astype(np.int64) @ b.astype(np.int64)) % 2)


def test_unknown_backend():
    with pytest.raises(ValueError):
        gf2.set_backend("fortran")


def test_empty_inputs():
    assert gf2.rank(np.zeros((0, 5), np.uint8)) == 0
    assert gf2.row_basis(np.zeros((0, 5), np.uint8)).shape == (0, 5)
