from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from entinv import oracle
from entinv.lattice import Lattice, capped_cylinder, rect_annulus, rect_disc, ring_annulus, tripartition
from entinv.pauli import PauliError, toric_model, trivial_model
from entinv.sectors import (
    area_law_fit,
    cmi_bits,
    default_choice,
    entropy_bits,
    invariant_bits,
    logical_algebra,
    sector_decomposition,
    state_group,
    uniformity_scan,
)


@pytest.mark.parametrize("spec", [(0, 0, 7, 7, 2), (1, 0, 7, 6, 2), (2, 3, 7, 7, 2), (0, 1, 6, 7, 2)])
def test_toric_invariant_is_two(torus8, spec):
    lat, m = torus8
    A = rect_annulus(lat, spec[:2], spec[2], spec[3], spec[4])
    rep = invariant_bits(m, A)
    assert rep.value_bits == 2 and rep.n_sectors == 4


def test_trivial_invariant_is_zero(torus8):
    lat, _ = torus8
    m = trivial_model(lat)
    assert invariant_bits(m, rect_annulus(lat, (0, 0), 7, 7, 2)).value_bits == 0


def test_hole_too_small_gives_zero(torus8):
    lat, m = torus8
    # a 2x2 hole is swallowed by the terms around it
    assert invariant_bits(m, rect_annulus(lat, (0, 0), 6, 6, 2)).value_bits == 0


def test_sector_table(torus8):
    lat, m = torus8
    A = rect_annulus(lat, (0, 0), 7, 7, 2)
    dec = sector_decomposition(m, A, default_choice(m), logical_algebra(m, A))
    assert dec.n_sectors == 4
    assert len(set(dec.sector_log2_dims)) == 1
    assert dec.log2_d_omega - dec.sector_log2_dims[dec.vacuum_label] == 2


def test_uniformity(torus8):
    lat, m = torus8
    annuli = [rect_annulus(lat, (x, 0), 7, 7, 2) for x in range(3)]
    assert uniformity_scan(m, annuli).uniform


def test_inconsistent_choice_rejected():
    lat = Lattice(3, 3)
    m = toric_model(lat)
    ch = default_choice(m)
    from entinv.sectors import GroundStateChoice

    bad = GroundStateChoice([ch.words[0]], "short")
    with pytest.raises(PauliError):
        state_group(m, bad)


def _dense_entropy(psi, keep, n):
    keep = list(keep)
    rest = [j for j in range(n) if j not in keep]
    m = np.moveaxis(psi.reshape([2] * n), keep + rest, range(n)).reshape(2 ** len(keep), -1)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s[s > 1e-14]
    return float(-(s * np.log2(s)).sum())


@pytest.mark.parametrize("L", [(2, 2), (2, 3)])
def test_entropy_matches_dense_everywhere(L):
    lat = Lattice(*L)
    m = toric_model(lat)
    ch = default_choice(m)
    st = state_group(m, ch)
    psi = oracle.ground_state(m, ch)
    n = m.n
    for k in range(n + 1):
        for R in combinations(range(n), k):
            assert abs(entropy_bits(st, R) - _dense_entropy(psi, R, n)) < 1e-9


def test_area_law_and_cmi(torus8):
    lat, m = torus8
    ch = default_choice(m)
    A = rect_annulus(lat, (0, 0), 7, 7, 2)
    regs = [rect_disc(lat, (0, 0), 2, 2), rect_disc(lat, (0, 0), 3, 2), rect_disc(lat, (0, 0), 3, 3), A]
    fit = area_law_fit(m, ch, regs)
    assert fit.gamma == 1 and fit.residual == 0 and fit.alpha == Fraction(1, 2)
    X, Y, Z = tripartition(A)
    assert cmi_bits(state_group(m, ch), X, Y, Z) == 2


def test_cmi_rejects_overlap(torus8):
    lat, m = torus8
    st = state_group(m, default_choice(m))
    D = rect_disc(lat, (0, 0), 2, 2)
    with pytest.raises(ValueError):
        cmi_bits(st, D, D, D)


def test_sphere_bands():
    cc = capped_cylinder((2, 2, 2, 2))
    m = toric_model(cc)
    assert invariant_bits(m, ring_annulus(cc, 1, 2, closed=False)).value_bits == 2
    cc4 = capped_cylinder((4, 2, 2, 4))
    rep = invariant_bits(toric_model(cc4), ring_annulus(cc4, 1, 2))
    assert rep.value_bits == 2 and rep.log2_d_omega == 8
