import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entinv.lattice import Lattice
from entinv.pauli import (
    PauliError,
    PauliGroup,
    PauliWord,
    build_model,
    commutation_matrix,
    symplectic_product,
    toric_model,
    trivial_model,
)

N = 4


@st.composite
def words(draw, n=N):
    x = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    z = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    return PauliWord(np.array(x), np.array(z), draw(st.integers(0, 3)))


@given(words(), words())
def test_product_matches_dense(p, q):
    assert np.allclose((p * q).to_dense(), p.to_dense() @ q.to_dense())


@given(words(), words())
def test_symplectic_product_is_commutation(p, q):
    P, Q = p.to_dense(), q.to_dense()
    commute = np.allclose(P @ Q, Q @ P)
    assert commute == (symplectic_product(p, q) == 0)


@given(words())
def test_str_round_trip(p):
    if p.is_hermitian():
        assert PauliWord.from_str(str(p), N) == p


def test_literals():
    w = PauliWord.from_str("X3·Z7", 8)
    assert w.support == (3, 7) and str(w) == "X3·Z7"
    assert str(PauliWord.from_str("-Y0 Z1", 2)) == "-Y0·Z1"
    assert PauliWord.from_str("I", 3).is_identity()
    for bad in ("X9", "Q1", "X1·Z1"):
        with pytest.raises(PauliError):
            PauliWord.from_str(bad, 4)


def test_group_rank_and_membership():
    g = PauliGroup([PauliWord.from_str("X0·X1", 3), PauliWord.from_str("Z0·Z1", 3), PauliWord.from_str("Y0·Y1", 3)])
    assert g.rank == 2
    assert g.contains(PauliWord.from_str("-Y0·Y1", 3))
    assert not g.contains(PauliWord.from_str("Z0", 3))
    assert g.is_abelian()


def test_subgroup_supported_in():
    lat = Lattice(3, 3)
    m = toric_model(lat)
    sub = m.group.subgroup_supported_in(lat.star(1, 1))
    assert sub.rank == 1


def test_toric_2x2_terms_and_trace():
    lat = Lattice(2, 2)
    m = toric_model(lat)
    assert len(m.generators) == 8
    H = sum(np.eye(256) - (np.eye(256) + g.to_dense()) / 2 for g in m.generators)
    assert not commutation_matrix(m.generators).any()
    P = np.eye(256)
    for g in m.generators:
        P = P @ (np.eye(256) + g.to_dense()) / 2
    assert np.isclose(np.trace(P).real, 4)
    assert np.isclose(np.linalg.eigvalsh(H)[:4], 0).all()


def test_models():
    lat = Lattice(3, 3)
    assert build_model("trivial", lat).group.rank == lat.n_sites
    assert toric_model(lat).group.rank == lat.n_sites - 2
    assert trivial_model(lat).name == "trivial"
    with pytest.raises(PauliError):
        build_model("color", lat)
