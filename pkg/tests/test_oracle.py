import numpy as np
import pytest

from entinv import oracle as o
from entinv.lattice import Lattice, capped_cylinder, fatten, ring_annulus
from entinv.pauli import PauliWord, toric_model
from entinv.qdouble import cyclic, parse_group, symmetric3
from entinv.sectors import default_choice, invariant_bits, state_group


def test_bell_pair_reduces_to_half_identity():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    red = o.partial_trace(psi, [0], [0, 1])
    assert np.allclose(red.matrix, np.eye(2) / 2)
    assert abs(o.von_neumann_bits(red) - 1) < 1e-12


def test_pure_vs_maximally_mixed_is_one_bit():
    rho = np.diag([1.0, 0.0])
    half = np.eye(2) / 2
    assert abs(o.relative_entropy_bits(rho, half) - 1) < 1e-12
    assert abs(o.max_relative_entropy_bits(rho, half) - 1) < 1e-12


def test_support_leak_gives_infinity():
    assert o.relative_entropy_bits(np.eye(2) / 2, np.diag([1.0, 0.0])) == np.inf


def test_trace_distance():
    assert abs(o.trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) - 1) < 1e-12


def test_projector_validation():
    with pytest.raises(o.OracleError):
        o.DenseOperator((0,), np.array([[1, 1], [0, 0]], dtype=float), projector=True)


def test_ground_projector_rank_routes_agree():
    lat = Lattice(2, 2)
    m = toric_model(lat)
    terms = o.model_terms(m)
    sites = tuple(range(m.n))
    gp = o.ground_projector(terms, sites)
    assert gp.rank() == 4
    assert np.isclose(np.trace(gp.matrix()).real, 4)
    assert o.orbit_rank(terms, sites, 2) == 4
    Q = o.range_basis(gp.apply, gp.dim, np.random.default_rng(0))
    assert Q.shape[1] == 4


def test_toric_terms_from_both_builders_agree():
    lat = Lattice(2, 3)
    a = o.build_toric_terms(lat)
    b = o.model_terms(toric_model(lat))
    assert len(a) == len(b)
    for s, t in zip(a, b):
        assert s.support == t.support
        assert np.allclose(s.dense(), t.dense())


def test_qdouble_z2_reproduces_toric_terms():
    lat = Lattice(2, 3)
    qd = o.build_qdouble_terms(cyclic(2), lat)
    tor = o.build_toric_terms(lat)
    key = lambda t: (t.support, t.dense().round(12).tobytes())  # noqa: E731
    assert sorted(map(key, qd)) == sorted(map(key, tor))


def test_s3_vertex_term_rank():
    lat = Lattice(3, 3)
    star = lat.star(1, 1)
    (av,) = [t for t in o.build_qdouble_terms(symmetric3(), lat, star) if t.support == tuple(sorted(star))]
    assert round(np.trace(av.dense()).real) == 216


@pytest.mark.parametrize("group", ["Z2", "Z3"])
def test_qdouble_terms_commute(group):
    cc = capped_cylinder((2, 2))
    terms = o.build_qdouble_terms(parse_group(group), cc)
    assert len(terms) == len(cc.stars) + len(cc.plaquettes)
    for i, a in enumerate(terms):
        for b in terms[i + 1:]:
            assert o.commutator_norm(a, b) < 1e-10


@pytest.mark.parametrize("group", ["S3", "Q8"])
def test_nonabelian_vertex_and_face_commute(group):
    lat = Lattice(3, 3)
    frag = sorted(set(lat.star(1, 1)) | set(lat.plaquette(1, 1)))
    terms = o.build_qdouble_terms(parse_group(group), lat, frag)
    assert len(terms) == 2
    assert o.commutator_norm(*terms) < 1e-10


def test_dense_invariant_matches_stabilizer(sphere):
    cc, m, A = sphere
    d = o.dense_invariant(m, A)
    assert abs(d.relative_entropy_bits - 2) < 1e-9
    assert abs(d.max_relative_entropy_bits - d.relative_entropy_bits) < 1e-9
    assert invariant_bits(m, A).value_bits == 2
    assert d.rank_aplus == 16


def test_size_cap():
    lat = Lattice(8, 8)
    m = toric_model(lat)
    from entinv.lattice import rect_annulus

    with pytest.raises(o.SizeCapError):
        o.dense_invariant(m, rect_annulus(lat, (0, 0), 7, 7, 2))


def test_sector_structure(sphere):
    cc, m, A = sphere
    projs = o.sector_projectors_dense(m, A)
    assert len(projs) == 4
    rho = o.partial_trace(o.ground_state(m), A.sites, tuple(range(m.n)))
    rep = o.verify_convex_decomposition(rho, projs)
    assert rep.passed and max(rep.weights) > 1 - 1e-9
    for p in projs:
        assert o.verify_sector_rdm_uniqueness(m, A, p, k=4).passed


def test_tqo_on_a_disc():
    lat = Lattice(3, 3)
    m = toric_model(lat)
    assert o.verify_tqo1(m, lat.region(lat.star(1, 1)), k=5).passed


def test_tqo_detects_a_logical():
    # Z on a full non-contractible loop is not proportional to the ground projector
    lat = Lattice(2, 3)
    m = toric_model(lat)
    loop = [lat.h(x, 0) for x in range(2)]
    W = PauliWord.from_sites(m.n, zs=loop).restricted(loop).to_dense()
    rep = o.verify_tqo1(m, lat.region(loop), observables=[W])
    assert not rep.passed


def test_stabilizer_rdm_matches_global_state(sphere):
    cc, m, A = sphere
    st = state_group(m, default_choice(m))
    a = o.stabilizer_rdm(st, A.sites).matrix
    b = o.partial_trace(o.ground_state(m), A.sites, tuple(range(m.n))).matrix
    assert np.abs(a - b).max() < 1e-12
    tau = o.dense_invariant(m, A).tau.matrix
    ap = fatten(cc, A.region, m.supports)
    assert np.abs(o.stabilizer_rdm(m.local_group(ap), A.sites).matrix - tau).max() < 1e-12


def test_dense_cmi_of_ghz_like_state():
    psi = np.zeros(8)
    psi[0] = psi[7] = 1 / np.sqrt(2)
    rho = o.DensityMatrix(np.outer(psi, psi), (0, 1, 2))
    assert abs(o.dense_cmi_bits(rho, (0,), (1,), (2,)) - 1) < 1e-12
    prod = o.DensityMatrix(np.eye(8) / 8, (0, 1, 2))
    assert abs(o.dense_cmi_bits(prod, (0,), (1,), (2,))) < 1e-12
    with pytest.raises(o.OracleError):
        o.dense_cmi_bits(rho, (0,), (0,), (2,))


def test_clifford_unitary_images():
    from entinv.circuits import random_circuit

    g = next(random_circuit(Lattice(2, 2), 1, 4).gates())
    U = g.matrix()
    assert np.allclose(U @ U.conj().T, np.eye(16))
    k = g.k
    for j, img in enumerate(g.images()):
        which = "X" if j % 2 == 0 else "Z"
        P = PauliWord.from_str(f"{which}{j // 2}", k).to_dense()
        assert np.allclose(U @ P @ U.conj().T, img.to_dense())


def test_haar_spot_check(sphere):
    cc, m, A = sphere
    rep = o.haar_spot_check(m, A, A.sites[:2], seed=3)
    assert rep.difference < 1e-8


def test_thin_annulus_ranks_small():
    cc = capped_cylinder((2, 2, 2, 2))
    A = ring_annulus(cc, 1, 2, closed=False)
    cnt = o.thin_annulus_ranks(cyclic(3), cc, A)
    assert (cnt.total, cnt.vacuum) == (81, 9)


def test_vacuum_block_needs_abelian_group(sphere):
    cc, m, A = sphere
    with pytest.raises(o.OracleError):
        o.loop_operators(symmetric3(), cc, A)
