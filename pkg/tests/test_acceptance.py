"""Acceptance criteria, one test and one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
from click.testing import CliRunner

from entinv import fib, oracle, qdouble
from entinv.circuits import invariance_test, random_circuit
from entinv.cli import WALL_KEY, main
from entinv.lattice import (
    GeometryError,
    Lattice,
    capped_cylinder,
    fatten,
    rect_annulus,
    rect_disc,
    ring_annulus,
    separated,
    tripartition,
)
from entinv.pauli import toric_model, trivial_model
from entinv.sectors import area_law_fit, cmi_bits, default_choice, invariant_bits, state_group

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover - direct script run outside pytest
    ACCEPTANCE_LINES = {}

# tolerances
ROUTE_TOL = 1e-9
SPOT_TOL = 1e-8
QD_TOL = 1e-12
BLOCK_TOL = 1e-10
RDM_TOL = 1e-9
TQO_TOL = 1e-9
FIB_RATIO_TOL = 1e-7
FIB_LOG_TOL = 1e-8
ANNULUS_SECONDS = 1.0

# circuit geometry: width t annulus on a torus large enough for a hole that
# survives depth-2 terms on both sides
CIRCUIT_LAT = 26
CIRCUIT_ANNULUS = ((0, 0), 21, 21, 7)


def record(k: int, name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {k:>2}. {name}: {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)


def _contractible_annuli(lat: Lattice, min_width: int = 2):
    out = []
    for W in range(2 * min_width + 1, lat.Lx):
        for H in range(2 * min_width + 1, lat.Ly):
            for t in range(min_width, (min(W, H) - 1) // 2 + 1):
                out.append(rect_annulus(lat, (0, 0), W, H, t))
    return out


def test_01_toric_invariant():
    lat8 = Lattice(8, 8)
    m8 = toric_model(lat8)
    specs8 = [((0, 0), 7, 7, 2), ((1, 0), 7, 7, 2), ((2, 3), 7, 7, 2), ((0, 0), 7, 6, 2), ((0, 1), 6, 7, 2), ((4, 4), 7, 6, 2)]
    vals8, slow = [], 0.0
    for anchor, W, H, t in specs8:
        A = rect_annulus(lat8, anchor, W, H, t)
        t0 = time.perf_counter()
        vals8.append(invariant_bits(m8, A).value_bits)
        slow = max(slow, time.perf_counter() - t0)
    ok8 = all(v == 2 for v in vals8) and len(set(specs8)) >= 6 and slow < ANNULUS_SECONDS

    lat6 = Lattice(6, 6)
    m6 = toric_model(lat6)
    vals6 = [invariant_bits(m6, A).value_bits for A in _contractible_annuli(lat6)]
    ok6 = bool(vals6) and all(v == 2 for v in vals6)
    passed = ok8 and ok6
    record(
        1,
        "toric invariant on 6x6 and 8x8",
        passed,
        f"8x8: {sum(v == 2 for v in vals8)}/{len(vals8)} annuli at 2 bits, slowest {slow:.3f}s; "
        f"6x6: {sum(v == 2 for v in vals6)}/{len(vals6)} width>=2 annuli at 2 bits "
        f"(values {sorted({str(v) for v in vals6})}; every hole is at most 1x1)",
    )
    assert passed


def test_02_cross_route():
    cc = capped_cylinder((2, 2, 2, 2))
    m = toric_model(cc)
    A = ring_annulus(cc, 1, 2, closed=False)
    stab = float(invariant_bits(m, A).value_bits)
    d = oracle.dense_invariant(m, A)
    gap = abs(d.relative_entropy_bits - stab)
    gap_max = abs(d.max_relative_entropy_bits - d.relative_entropy_bits)
    passed = d.n_aplus <= oracle.MAX_SITES and gap < ROUTE_TOL and gap_max < ROUTE_TOL
    record(
        2,
        "cross-route equality",
        passed,
        f"{cc.describe()} {A.describe()}, |A_+|={d.n_aplus}: stabilizer {stab}, D={d.relative_entropy_bits:.15f} "
        f"(|diff| {gap:.1e}), Dmax-D {gap_max:.1e}, tol {ROUTE_TOL}",
    )
    assert passed


def test_03_trivial_phase():
    lat = Lattice(8, 8)
    base = invariant_bits(trivial_model(lat), rect_annulus(lat, (0, 0), 7, 7, 2)).value_bits
    big = Lattice(12, 12)
    A = rect_annulus(big, (0, 0), 11, 11, 5)
    mt = trivial_model(big)
    after = []
    for s in range(10):
        depth = 1 + s % 3
        after.append(invariance_test(mt, A, random_circuit(big, depth, s)).after_bits)
    passed = base == 0 and all(v == 0 for v in after)
    record(3, "trivial phase", passed, f"I={base} on 8x8; after 10 circuits of depth 1..3 on 12x12 w5: {after}")
    assert passed


def test_04_circuit_invariance():
    L = CIRCUIT_LAT
    lat = Lattice(L, L)
    m = toric_model(lat)
    anchor, W, H, t = CIRCUIT_ANNULUS
    A = rect_annulus(lat, anchor, W, H, t)
    before = int(invariant_bits(m, A).value_bits)
    fails, n = [], 0
    for depth in (1, 2):
        for seed in range(20):
            r = invariance_test(m, A, random_circuit(lat, depth, seed), before_bits=before)
            n += 1
            if not (r.passed and r.before_bits == 2):
                fails.append((depth, seed, r.after_bits))
    cc = capped_cylinder((2, 2, 2, 2))
    band = ring_annulus(cc, 1, 2, closed=False)
    spot = oracle.haar_spot_check(toric_model(cc), band, band.sites[:2], seed=0)
    passed = not fails and spot.difference < SPOT_TOL
    record(
        4,
        "circuit invariance",
        passed,
        f"{L}x{L}, t={t}, hole {A.hole_w}x{A.hole_h}, r=depth: {n - len(fails)}/{n} cases equal at {before} bits"
        f"{'' if not fails else f' failures {fails}'}; Haar gate on {cc.n_sites}-qubit sphere |dI|={spot.difference:.1e} (tol {SPOT_TOL})",
    )
    assert passed


def test_05_quantum_double():
    rows, ok = [], True
    for name in ("Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8"):
        G = qdouble.parse_group(name)
        tab = qdouble.anyon_table(G)
        inv = qdouble.invariant_qd(G, tab)
        good = tab.total_dim_sq == G.order**2 and abs(inv.bits - 2 * math.log2(G.order)) < QD_TOL
        ok &= good
        rows.append(f"{name}:{len(tab)}")
    s3 = qdouble.invariant_qd(qdouble.symmetric3()).bits
    counts = len(qdouble.anyon_table(qdouble.cyclic(2))) == 4 and len(qdouble.anyon_table(qdouble.symmetric3())) == 8
    passed = ok and counts and abs(s3 - 5.169925001) < 1e-9 and abs(s3 - math.log2(36)) < QD_TOL
    record(5, "quantum double closed forms", passed, f"sum d^2 = |G|^2 and I = 2log2|G| for all; anyons {' '.join(rows)}; S3 I={s3!r}")
    assert passed


def test_06_thin_annulus_dimensions():
    cc = capped_cylinder((4, 2, 2, 4))
    A = ring_annulus(cc, 1, 2)
    aplus = fatten(cc, A.region, list(cc.stars) + list(cc.plaquettes))
    n_in, n_out = qdouble.boundary_counts(aplus.sites, A.hole.sites, cc.plaquettes)
    G = qdouble.cyclic(2)
    closed = qdouble.thin_annulus_dims(G, n_in, n_out)
    dense = oracle.thin_annulus_ranks(G, cc, A)
    passed = (n_in, n_out) == (4, 4) and (dense.total, dense.vacuum) == (2**8, 2**6) == (closed.total, closed.vacuum)
    record(
        6,
        "thin annulus dimensions",
        passed,
        f"{cc.describe()} {A.describe()}: n'={n_in}, N'={n_out}; dense ranks total {dense.total}, vacuum {dense.vacuum}; "
        f"closed form {closed.total}, {closed.vacuum}",
    )
    assert passed


def test_07_tee_and_cmi():
    lat = Lattice(8, 8)
    m = toric_model(lat)
    ch = default_choice(m)
    st = state_group(m, ch)
    A = rect_annulus(lat, (0, 0), 7, 7, 2)
    regs = [rect_disc(lat, (0, 0), 2, 2), rect_disc(lat, (0, 0), 3, 2), rect_disc(lat, (0, 0), 3, 3), rect_disc(lat, (1, 1), 4, 3), A]
    fit = area_law_fit(m, ch, regs)
    X, Y, Z = tripartition(A)
    cmi = cmi_bits(st, X, Y, Z)
    margins = []
    for model in (m, trivial_model(lat)):
        s = state_group(model, default_choice(model))
        for B in (A, rect_annulus(lat, (1, 0), 7, 7, 2), rect_annulus(lat, (0, 0), 7, 7, 3)):
            try:
                x, y, z = tripartition(B)
            except GeometryError:
                continue
            margins.append(cmi_bits(s, x, y, z) - invariant_bits(model, B).value_bits)
    toric_margin = cmi - invariant_bits(m, A).value_bits

    # dense: explicit reduced states on a tapered sphere band with a separated tripartition
    cc = capped_cylinder((2, 4, 2, 2))
    ms = toric_model(cc)
    band = ring_annulus(cc, 1, 2, closed=False)
    Xs, Ys, Zs = (4, 16), (5, 7, 17, 19), (6, 18)
    terms = list(cc.stars) + list(cc.plaquettes)
    assert separated(cc.region(Xs), cc.region(Zs), terms)
    rho = oracle.stabilizer_rdm(state_group(ms, default_choice(ms)), band.sites)
    gp = oracle.aplus_projector(ms, band)
    Q = gp.basis(1)
    tau = oracle.DensityMatrix(oracle.reduce_columns(Q, gp.sites, band.sites) / Q.shape[1], band.sites)
    diff = oracle.von_neumann_bits(tau) - oracle.von_neumann_bits(rho)
    cmi_dense = oracle.dense_cmi_bits(rho, Xs, Ys, Zs)
    dense_ok = diff <= cmi_dense + 1e-9

    passed = (
        fit.residual == 0
        and fit.gamma == 1
        and fit.alpha.denominator >= 1
        and cmi == 2
        and toric_margin == 0
        and all(mg >= 0 for mg in margins)
        and dense_ok
    )
    record(
        7,
        "TEE and CMI",
        passed,
        f"fit over {len(regs)} regions alpha={fit.alpha} gamma={fit.gamma} residual={fit.residual}; CMI={cmi}; "
        f"margin toric {toric_margin}, all {sorted({str(x) for x in margins})}; dense on {cc.describe()}: "
        f"S(tau)-S(rho)={diff:.12f} <= CMI={cmi_dense:.12f}",
    )
    assert passed


def test_08_sector_structure():
    cc = capped_cylinder((2, 2, 2, 2))
    m = toric_model(cc)
    A = ring_annulus(cc, 1, 2, closed=False)
    projs = oracle.sector_projectors_dense(m, A)
    rho = oracle.partial_trace(oracle.ground_state(m), A.sites, tuple(range(m.n)))
    gp = oracle.aplus_projector(m, A)
    Q = gp.basis(1)
    sigmas = [rho, oracle.DensityMatrix(oracle.reduce_columns(Q, gp.sites, A.sites) / Q.shape[1], A.sites)]
    rng = np.random.default_rng(0)
    for _ in range(8):
        v = oracle._random_in_range(Q, 1, rng)
        sigmas.append(oracle.DensityMatrix(oracle.reduce_columns(v, gp.sites, A.sites), A.sites))
    off = max(oracle.verify_convex_decomposition(s, projs).off_block_norm for s in sigmas)
    uniq = max(oracle.verify_sector_rdm_uniqueness(m, A, p, k=10, seed=i).max_pairwise_distance for i, p in enumerate(projs))
    lat = Lattice(3, 3)
    tqo = oracle.verify_tqo1(toric_model(lat), lat.region(lat.star(1, 1)), k=20, seed=0)
    res = max(tqo.residuals)
    passed = off < BLOCK_TOL and uniq < RDM_TOL and res < TQO_TOL and len(tqo.residuals) == 20
    record(
        8,
        "sector structure",
        passed,
        f"{len(sigmas)} states, max off-block {off:.1e} (tol {BLOCK_TOL}); {len(projs)} sectors x 10 states, "
        f"max trace distance {uniq:.1e} (tol {RDM_TOL}); TQO-1 on a 3x3 torus star, 20 observables, max residual {res:.1e}",
    )
    assert passed


def test_09_fibonacci():
    ident = all(fib.dimension_identity(a, b) for a in range(1, 31) for b in range(1, 31))
    trees = all(len(fib.fusion_trees(n, q)) == fib.fusion_dim(n, q) for n in range(1, 13) for q in (fib.IOTA, fib.TAU))
    phi2 = fib.PHI**2
    r = abs(float(fib.tau_sector_ratio(20, 20)) - phi2)
    t = abs(float(fib.total_ratio(20, 20)) - (1 + phi2))
    g = abs(math.log2(fib.total_ratio(25, 25)) - math.log2((5 + math.sqrt(5)) / 2))
    passed = ident and trees and r < FIB_RATIO_TOL and t < FIB_RATIO_TOL and g < FIB_LOG_TOL
    record(9, "Fibonacci counting", passed, f"identity to 30: {ident}; trees to 12: {trees}; |ratio-phi^2|={r:.1e}; |total-(1+phi^2)|={t:.1e}; log gap {g:.1e}")
    assert passed


CLI_RUNS = [
    ("invariant", "--seed", "1"),
    ("invariant", "--lat", "sphere:2,2,2,2", "--route", "both", "--seed", "1"),
    ("qdouble", "--group", "S3", "--seed", "1"),
    ("qdouble", "--group", "Z2", "--route", "both", "--seed", "1"),
    ("tee", "--seed", "1"),
    ("circuit", "--lat", "16x16", "--annulus", "0,0,15,15,w4", "--depth", "1", "--seeds", "2", "--seed", "1", "--route", "both"),
    ("fib", "--seed", "1"),
]


def test_10_determinism():
    runner = CliRunner()
    bad = []
    for args in CLI_RUNS:
        outs = []
        for _ in range(2):
            res = runner.invoke(main, list(args))
            rep = json.loads(res.output)
            rep.pop(WALL_KEY)
            outs.append(json.dumps(rep, sort_keys=True, indent=2))
        if outs[0] != outs[1] or res.exit_code != 0:
            bad.append(args[0])
    passed = not bad
    record(10, "CLI determinism", passed, f"{len(CLI_RUNS) - len(bad)}/{len(CLI_RUNS)} commands byte-identical without the wall-time field")
    assert passed


if __name__ == "__main__":  # pragma: no cover
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    raise SystemExit(1 if failed else 0)
