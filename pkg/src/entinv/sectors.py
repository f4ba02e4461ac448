"""Logical algebras on annuli, sector decomposition and the entropic
invariant by rank counting; stabilizer entanglement entropies, area-law
fits and conditional mutual information.

All quantities are in bits and exact (integers or ``Fraction``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf2
from .lattice import Annulus, CellComplex, Lattice, Region, components, fatten
from .pauli import PauliError, PauliGroup, PauliWord, StabilizerModel, words_matrix


class UnsupportedRoute(RuntimeError):
    """The stabilizer route cannot handle this instance (e.g. non-abelian algebra)."""


@dataclass
class GroundStateChoice:
    """Extra commuting logical words fixed at +1 to pick a torus ground state."""

    words: list[PauliWord]
    label: str = "custom"


def z_loop_choice(lat: Lattice) -> GroundStateChoice:
    n = lat.n_sites
    wx = PauliWord.from_sites(n, zs=[lat.h(x, 0) for x in range(lat.Lx)])
    wy = PauliWord.from_sites(n, zs=[lat.v(0, y) for y in range(lat.Ly)])
    return GroundStateChoice([wx, wy], "z-loops")


def x_loop_choice(lat: Lattice) -> GroundStateChoice:
    n = lat.n_sites
    wx = PauliWord.from_sites(n, xs=[lat.v(x, 0) for x in range(lat.Lx)])
    wy = PauliWord.from_sites(n, xs=[lat.h(0, y) for y in range(lat.Ly)])
    return GroundStateChoice([wx, wy], "x-loops")


def default_choice(model: StabilizerModel) -> GroundStateChoice:
    if model.name == "toric" and isinstance(model.lattice, Lattice):
        return z_loop_choice(model.lattice)
    if model.name == "toric":
        # a sphere has a unique ground state
        return GroundStateChoice([], "none")
    if model.name == "trivial":
        return GroundStateChoice([], "none")
    raise PauliError(f"no default ground-state choice for model {model.name!r}")


def state_group(model: StabilizerModel, choice: GroundStateChoice) -> PauliGroup:
    """Signed stabilizer group of the selected ground state; checked maximal."""
    grp = PauliGroup(list(model.generators) + list(choice.words), model.n)
    if not grp.is_abelian():
        raise PauliError("ground-state choice does not commute with the model")
    if grp.rank != model.n:
        raise PauliError(f"ground-state choice leaves rank {grp.rank} < {model.n}: state not unique")
    if grp.contains_minus_identity():
        raise PauliError("ground-state choice is inconsistent with the model signs")
    return grp


def rank_supported_in(grp: PauliGroup, R: Region | Sequence[int]) -> int:
    """GF(2) rank of the elements of ``grp`` supported inside ``R``."""
    if not grp.generators:
        return 0
    sites = set(R.sites if isinstance(R, Region) else R)
    n = grp.n
    outside = np.array([j for j in range(n) if j not in sites], dtype=np.intp)
    if len(outside) == 0:
        return grp.rank
    sub = grp.matrix[:, np.concatenate([outside, outside + n])]
    ker = gf2.left_kernel(sub)
    if ker.shape[0] == 0:
        return 0
    elems = gf2.matmul(ker, grp.matrix)
    return gf2.rank(elems)


def _reduce_by(basis: np.ndarray, pivots: Sequence[int], v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for row, p in zip(basis, pivots):
        if v[p]:
            v ^= row
    return v


@dataclass
class LogicalAlgebra:
    annulus: Annulus
    fattened: Region
    basis: list[PauliWord]
    group_rank: int
    abelian: bool
    centralizer_rank: int
    null_rank: int

    @property
    def class_count(self) -> int:
        return 2 ** self.group_rank


def logical_algebra(model: StabilizerModel, A: Annulus | Region) -> LogicalAlgebra:
    """Pauli classes on ``A`` commuting with the terms inside ``A_+``, modulo
    the local stabilizer elements supported on ``A``."""
    region = A.region if isinstance(A, Annulus) else A
    lat = model.lattice
    n = model.n
    aplus = fatten(lat, region, model.supports)
    local = model.local_group(aplus)
    null = local.subgroup_supported_in(region)
    a_idx = np.asarray(region.sites, dtype=np.intp)
    k = len(a_idx)

    # words w on A with <t, w> = 0 for every local term t
    if local.generators:
        lm = local.matrix
        cons = np.concatenate([lm[:, n + a_idx], lm[:, a_idx]], axis=1)
        cent = gf2.left_kernel(cons.T)
    else:
        cent = np.eye(2 * k, dtype=np.uint8)
    cent_rank = gf2.rank(cent) if cent.shape[0] else 0

    def embed(v: np.ndarray) -> np.ndarray:
        full = np.zeros(2 * n, np.uint8)
        full[a_idx] = v[:k]
        full[n + a_idx] = v[k:]
        return full

    null_mat = words_matrix(null.generators, n)
    if null_mat.shape[0]:
        null_red, null_piv = gf2.rref(null_mat)
        null_red = null_red[: len(null_piv)]
    else:
        null_red, null_piv = null_mat, np.zeros(0, np.intp)
    resid = np.array([_reduce_by(null_red, null_piv, embed(v)) for v in cent], dtype=np.uint8).reshape(-1, 2 * n)
    reps = gf2.row_basis(resid) if resid.shape[0] else resid
    basis = [PauliWord.from_vector(v, int(np.sum(v[:n] & v[n:]))) for v in reps]
    abelian = True
    if basis:
        cm = _comm(basis)
        abelian = not cm.any()
    return LogicalAlgebra(
        annulus=A if isinstance(A, Annulus) else None,
        fattened=aplus,
        basis=basis,
        group_rank=cent_rank - null.rank,
        abelian=abelian,
        centralizer_rank=cent_rank,
        null_rank=null.rank,
    )


def _comm(words: Sequence[PauliWord]) -> np.ndarray:
    from .pauli import commutation_matrix

    return commutation_matrix(words)


@dataclass
class SectorDecomposition:
    labels: list[tuple[int, ...]]
    sector_log2_dims: list[int]
    vacuum_label: int
    loop_words: list[PauliWord]
    log2_d_omega: int
    flip_words: list[PauliWord] = field(default_factory=list)

    @property
    def n_sectors(self) -> int:
        return len(self.labels)


def sector_decomposition(
    model: StabilizerModel, A: Annulus | Region, choice: GroundStateChoice, la: LogicalAlgebra | None = None
) -> SectorDecomposition:
    if la is None:
        la = logical_algebra(model, A)
    if not la.abelian:
        raise UnsupportedRoute("non-abelian logical algebra: use the dense or closed-form route")
    n = model.n
    aplus = la.fattened
    local = model.local_group(aplus)
    log2_d = len(aplus) - local.rank
    loops = la.basis
    k = len(loops)

    # unitary string operators moving the vacuum into every other sector
    flips = []
    if k:
        rows = list(local.generators) + list(loops)
        rm = words_matrix(rows, n)
        sym = np.concatenate([rm[:, n:], rm[:, :n]], axis=1)
        for i in range(k):
            target = np.zeros(len(rows), np.uint8)
            target[len(local.generators) + i] = 1
            f = gf2.solve_right(sym, target)
            if f is None:
                raise UnsupportedRoute("no string operator flips sector label %d" % i)
            flips.append(PauliWord.from_vector(f, int(np.sum(f[:n] & f[n:]))))

    state = state_group(model, choice)
    vac = []
    for w in loops:
        el = state.signed_element(w)
        if el is None:
            raise UnsupportedRoute("ground state is not an eigenstate of a loop operator")
        vac.append(el.sign)

    labels, dims = [], []
    for signs in itertools.product((1, -1), repeat=k):
        signed = [w if s > 0 else -w for w, s in zip(loops, signs)]
        grp = PauliGroup(list(local.generators) + signed, n)
        if grp.contains_minus_identity():
            dims.append(None)
        else:
            dims.append(len(aplus) - grp.rank)
        labels.append(signs)
    if any(d is None for d in dims):
        raise UnsupportedRoute("inconsistent sector sign pattern")
    vacuum = labels.index(tuple(vac))
    return SectorDecomposition(labels, dims, vacuum, loops, log2_d, flips)


@dataclass
class InvariantReport:
    value_bits: Fraction
    route: str
    annulus: str
    sector_log2_dims: list[int] = field(default_factory=list)
    log2_d_omega: int | None = None
    n_sectors: int | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "route": self.route,
            "annulus": self.annulus,
            "value_bits": float(self.value_bits),
            "value_exact": str(self.value_bits),
            "n_sectors": self.n_sectors,
            "log2_d_omega": self.log2_d_omega,
            "sector_log2_dims": list(self.sector_log2_dims),
            **self.details,
        }


def invariant_bits(model: StabilizerModel, A: Annulus, choice: GroundStateChoice | None = None) -> InvariantReport:
    """Invariant in bits: rank of state-stabilizer elements on ``A`` minus
    rank of local-stabilizer elements on ``A``; cross-checked against the
    vacuum-sector dimension ratio."""
    if choice is None:
        choice = default_choice(model)
    state = state_group(model, choice)
    la = logical_algebra(model, A)
    local = model.local_group(la.fattened)
    value = rank_supported_in(state, A.region) - rank_supported_in(local, A.region)
    dec = sector_decomposition(model, A, choice, la)
    ratio_bits = dec.log2_d_omega - dec.sector_log2_dims[dec.vacuum_label]
    if ratio_bits != value:
        raise AssertionError(f"rank formula {value} disagrees with sector ratio {ratio_bits}")
    return InvariantReport(
        value_bits=Fraction(value),
        route="stabilizer",
        annulus=A.describe(),
        sector_log2_dims=dec.sector_log2_dims,
        log2_d_omega=dec.log2_d_omega,
        n_sectors=dec.n_sectors,
        details={"choice": choice.label, "class_count": la.class_count, "abelian": la.abelian},
    )


@dataclass
class UniformityScan:
    reports: list[InvariantReport]

    @property
    def uniform(self) -> bool:
        return len({r.value_bits for r in self.reports}) <= 1


def uniformity_scan(model: StabilizerModel, annuli: Sequence[Annulus], choice: GroundStateChoice | None = None) -> UniformityScan:
    return UniformityScan([invariant_bits(model, a, choice) for a in annuli])


def entropy_bits(state: PauliGroup, R: Region | Sequence[int]) -> int:
    """Von Neumann entropy (bits) of a pure stabilizer state reduced to ``R``."""
    if state.rank != state.n or not state.is_abelian():
        raise PauliError("entropy_bits needs a maximal commuting group (pure state)")
    sites = R.sites if isinstance(R, Region) else tuple(R)
    return len(set(sites)) - rank_supported_in(state, sites)


def boundary_size(lat: CellComplex, R: Region) -> int:
    """Number of lattice stars and plaquettes cut by the boundary of ``R``."""
    s = R.siteset
    return sum(1 for t in lat.stars + lat.plaquettes if (not s.isdisjoint(t)) and not s.issuperset(t))


def boundary_components(lat: CellComplex, R: Region) -> int:
    return len(components(lat, R.complement().sites))


@dataclass
class AreaLawFit:
    alpha: Fraction
    gamma: Fraction
    residual: Fraction
    rows: list[tuple[int, int, int]]


def _solve2(rows: Sequence[tuple[int, int, int]]) -> tuple[Fraction, Fraction, Fraction]:
    # least squares for S = alpha*b - gamma*nc, exact arithmetic
    sbb = sum(Fraction(b * b) for b, _, _ in rows)
    sbn = sum(Fraction(-b * c) for b, c, _ in rows)
    snn = sum(Fraction(c * c) for _, c, _ in rows)
    sbs = sum(Fraction(b * s) for b, _, s in rows)
    sns = sum(Fraction(-c * s) for _, c, s in rows)
    det = sbb * snn - sbn * sbn
    if det == 0:
        raise ValueError("singular design matrix: need regions with independent (|boundary|, components)")
    alpha = (snn * sbs - sbn * sns) / det
    gamma = (sbb * sns - sbn * sbs) / det
    res = sum((s - (alpha * b - gamma * c)) ** 2 for b, c, s in rows)
    return alpha, gamma, res


def area_law_fit(model: StabilizerModel, choice: GroundStateChoice | None, regions: Sequence[Region | Annulus]) -> AreaLawFit:
    if choice is None:
        choice = default_choice(model)
    if len(regions) < 3:
        raise ValueError("area-law fit needs at least 3 regions")
    state = state_group(model, choice)
    lat = model.lattice
    rows = []
    for R in regions:
        reg = R.region if isinstance(R, Annulus) else R
        rows.append((boundary_size(lat, reg), boundary_components(lat, reg), entropy_bits(state, reg)))
    alpha, gamma, res = _solve2(rows)
    return AreaLawFit(alpha, gamma, res, rows)


def cmi_bits(state: PauliGroup, X: Region, Y: Region, Z: Region) -> int:
    """I(X:Z|Y) = S(XY) + S(YZ) - S(Y) - S(XYZ)."""
    if not (X.isdisjoint(Y) and Y.isdisjoint(Z) and X.isdisjoint(Z)):
        raise ValueError("regions overlap")
    S = lambda r: entropy_bits(state, r)  # noqa: E731
    return S(X | Y) + S(Y | Z) - S(Y) - S(X | Y | Z)
