import math
from fractions import Fraction

import numpy as np
import pytest

from entinv.qdouble import (
    FiniteGroup,
    GroupError,
    anyon_table,
    boundary_counts,
    centralizer,
    class_multiplication,
    conjugacy_classes,
    cyclic,
    dihedral,
    invariant_qd,
    irrep_dimensions,
    parse_group,
    product,
    quaternion8,
    sector_probabilities,
    symmetric3,
    thin_annulus_dims,
    trivial,
)

GROUPS = ["1", "Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8"]


@pytest.mark.parametrize("name", GROUPS)
def test_sum_of_squares(name):
    G = parse_group(name)
    tab = anyon_table(G)
    assert tab.total_dim_sq == G.order**2
    assert tab.vacuum.quantum_dim == 1
    assert invariant_qd(G, tab).ratio == G.order**2


@pytest.mark.parametrize("name,count", [("Z2", 4), ("Z3", 9), ("S3", 8), ("D4", 22), ("Q8", 22), ("1", 1)])
def test_anyon_counts(name, count):
    assert len(anyon_table(parse_group(name))) == count


def test_s3_invariant():
    assert abs(invariant_qd(symmetric3()).bits - 5.169925001442312) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_irreps_stable(seed):
    assert sorted(irrep_dimensions(symmetric3(), seed)) == [1, 1, 2]
    assert sorted(irrep_dimensions(dihedral(4), seed)) == [1, 1, 1, 1, 2]


def test_class_data():
    G = symmetric3()
    assert sorted(len(c) for c in conjugacy_classes(G)) == [1, 2, 3]
    assert conjugacy_classes(G)[0] == (G.identity,)
    M = class_multiplication(G)
    assert M.shape == (3, 3, 3)
    for cls in conjugacy_classes(G):
        assert centralizer(G, cls[0]).order * len(cls) == 6


def test_group_constructors():
    assert quaternion8().order == 8 and not quaternion8().is_abelian()
    assert product(cyclic(2), cyclic(2)).is_abelian()
    assert dihedral(3).order == 6
    assert trivial().order == 1


def test_bad_tables_rejected():
    with pytest.raises(GroupError):
        FiniteGroup("bad", np.array([[0, 1], [0, 1]]), 0)
    with pytest.raises(GroupError):
        parse_group("S5")
    with pytest.raises(GroupError):
        parse_group("Z0")


def test_thin_annulus_closed_form():
    dims = thin_annulus_dims(cyclic(2), 4, 4)
    assert (dims.total, dims.vacuum) == (256, 64)
    probs = sector_probabilities(symmetric3())
    assert sum(probs.values()) == 1
    assert all(isinstance(p, Fraction) for p in probs.values())


def test_boundary_counts_split():
    faces = [(0, 1), (1, 2), (2, 3), (5, 6)]
    assert boundary_counts([1, 2], [0], faces) == (1, 1)


def test_invariant_is_twice_log_order():
    for name in GROUPS[1:]:
        G = parse_group(name)
        assert abs(invariant_qd(G).bits - 2 * math.log2(G.order)) < 1e-12
