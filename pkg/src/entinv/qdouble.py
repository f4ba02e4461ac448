"""Finite groups and the quantum-double closed forms.

Anyons of the double D(G) are pairs (C, R): a conjugacy class C and an
irrep R of the centralizer of a class representative. Their quantum
dimension is ``n_R * |C|`` and the squares sum to ``|G|^2``.

Irrep dimensions come from the class-sum algebra: class sums commute, a
random real combination of their multiplication matrices has one
eigenvector per irrep, and the central character on that eigenvector
fixes ``chi(1)^2 = |G| / sum_i |omega_i|^2 / |C_i|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

MAX_ORDER = 48


class GroupError(ValueError):
    """Malformed group data or an unsupported group request."""


class IrrepFailure(RuntimeError):
    """Class-sum diagonalization did not resolve cleanly."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    table: np.ndarray = field(repr=False)
    identity: int = 0

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", t)
        n = t.shape[0]
        if t.shape != (n, n) or n < 1:
            raise GroupError("Cayley table must be square and non-empty")
        if n > MAX_ORDER:
            raise GroupError(f"order {n} exceeds the supported maximum {MAX_ORDER}")
        rng = np.arange(n)
        for row in t:
            if not np.array_equal(np.sort(row), rng):
                raise GroupError("Cayley table rows are not permutations")
        for col in t.T:
            if not np.array_equal(np.sort(col), rng):
                raise GroupError("Cayley table columns are not permutations")
        e = self.identity
        if not (np.array_equal(t[e], rng) and np.array_equal(t[:, e], rng)):
            raise GroupError("identity index does not act trivially")
        if n <= 24:
            lhs = t[t[:, :, None], rng[None, None, :]]  # (ab)c
            rhs = t[rng[:, None, None], t[None, :, :]]  # a(bc)
            if not np.array_equal(lhs, rhs):
                raise GroupError("Cayley table is not associative")
        else:
            g = np.random.default_rng(0)
            a, b, c = g.integers(0, n, (3, 4000))
            if not np.array_equal(t[t[a, b], c], t[a, t[b, c]]):
                raise GroupError("Cayley table is not associative")

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def __len__(self) -> int:
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    @property
    def inverse(self) -> np.ndarray:
        return np.argmax(self.table == self.identity, axis=1)

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def generators(self) -> list[int]:
        """A small generating set, greedily chosen."""
        gens: list[int] = []
        span = {self.identity}
        for g in range(self.order):
            if g in span:
                continue
            gens.append(g)
            span = _closure(self, gens)
            if len(span) == self.order:
                break
        return gens

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteGroup) and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.name, self.table.tobytes()))


def _closure(G: FiniteGroup, gens: Sequence[int]) -> set[int]:
    seen = {G.identity}
    frontier = [G.identity]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = G.mul(a, g)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    return seen


def from_permutations(name: str, perms: Sequence[Sequence[int]]) -> FiniteGroup:
    """Group of the given permutations (must be closed; identity first)."""
    perms = [tuple(p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    if len(index) != len(perms):
        raise GroupError("duplicate permutations")
    n = len(perms)
    table = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            # (p*q)(x) = p(q(x))
            r = tuple(p[x] for x in q)
            if r not in index:
                raise GroupError("permutation set is not closed")
            table[i, j] = index[r]
    ident = tuple(range(len(perms[0])))
    if ident not in index:
        raise GroupError("identity permutation missing")
    return FiniteGroup(name, table, index[ident])


def generated_by(name: str, gens: Sequence[Sequence[int]]) -> FiniteGroup:
    """Permutation group generated by ``gens``, identity first, BFS order."""
    deg = len(gens[0])
    ident = tuple(range(deg))
    elems = [ident]
    seen = {ident}
    i = 0
    while i < len(elems):
        p = elems[i]
        for g in gens:
            r = tuple(p[x] for x in g)
            if r not in seen:
                seen.add(r)
                elems.append(r)
                if len(elems) > MAX_ORDER:
                    raise GroupError(f"generated group exceeds order {MAX_ORDER}")
        i += 1
    return from_permutations(name, elems)


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupError("cyclic group needs n >= 1")
    a = np.arange(n)
    return FiniteGroup(f"Z{n}", (a[:, None] + a[None, :]) % n, 0)


def trivial() -> FiniteGroup:
    return FiniteGroup("1", np.zeros((1, 1), dtype=np.int64), 0)


def symmetric3() -> FiniteGroup:
    return generated_by("S3", [(1, 0, 2), (1, 2, 0)])


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, order 2n."""
    if n < 2:
        raise GroupError("dihedral group needs n >= 2")
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return generated_by(f"D{n}", [rot, ref])


def quaternion8() -> FiniteGroup:
    # elements +-1, +-i, +-j, +-k encoded as (sign, unit) with unit in 1,i,j,k
    units = ["1", "i", "j", "k"]
    mult = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }
    elems = [(s, u) for s in (1, -1) for u in units]
    idx = {e: i for i, e in enumerate(elems)}
    table = np.empty((8, 8), dtype=np.int64)
    for a, (sa, ua) in enumerate(elems):
        for b, (sb, ub) in enumerate(elems):
            s, u = mult[(ua, ub)]
            table[a, b] = idx[(sa * sb * s, u)]
    return FiniteGroup("Q8", table, 0)


def product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Direct product; element ``(g, h)`` has index ``g*|H| + h``."""
    m = H.order
    n = G.order * m
    if n > MAX_ORDER:
        raise GroupError(f"product order {n} exceeds {MAX_ORDER}")
    a = np.arange(n)
    g, h = a // m, a % m
    table = G.table[g[:, None], g[None, :]] * m + H.table[h[:, None], h[None, :]]
    return FiniteGroup(f"{G.name}x{H.name}", table, G.identity * m + H.identity)


def parse_group(text: str) -> FiniteGroup:
    """CLI literal: ``Zn``, ``S3``, ``Dn``, ``Q8`` and ``x``-products such as ``Z2xZ2``."""
    parts = [p.strip() for p in text.strip().split("x")]
    if not parts or any(not p for p in parts):
        raise GroupError(f"bad group literal {text!r}")
    groups = []
    for p in parts:
        up = p.upper()
        if up == "S3":
            groups.append(symmetric3())
        elif up == "Q8":
            groups.append(quaternion8())
        elif up in ("1", "TRIVIAL"):
            groups.append(trivial())
        elif up.startswith("Z") and up[1:].isdigit():
            groups.append(cyclic(int(up[1:])))
        elif up.startswith("D") and up[1:].isdigit():
            groups.append(dihedral(int(up[1:])))
        else:
            raise GroupError(f"unknown group literal {p!r}")
    out = groups[0]
    for g in groups[1:]:
        out = product(out, g)
    return out


# --------------------------------------------------------------------------
# classes, centralizers, irreps


def conjugacy_classes(G: FiniteGroup) -> list[tuple[int, ...]]:
    """Classes as sorted tuples; the identity class comes first."""
    inv = G.inverse
    t = G.table
    left = set(range(G.order))
    out = []
    for a in [G.identity] + [x for x in range(G.order) if x != G.identity]:
        if a not in left:
            continue
        cls = sorted({int(t[t[g, a], inv[g]]) for g in range(G.order)})
        left -= set(cls)
        out.append(tuple(cls))
    return out


def centralizer_elements(G: FiniteGroup, g: int) -> list[int]:
    t = G.table
    return [h for h in range(G.order) if t[h, g] == t[g, h]]


def subgroup(G: FiniteGroup, elems: Sequence[int], name: str = "H") -> FiniteGroup:
    elems = list(elems)
    if G.identity not in elems:
        raise GroupError("subset lacks the identity")
    elems.remove(G.identity)
    elems.insert(0, G.identity)
    index = {e: i for i, e in enumerate(elems)}
    k = len(elems)
    table = np.empty((k, k), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            c = G.mul(a, b)
            if c not in index:
                raise GroupError("subset is not closed")
            table[i, j] = index[c]
    return FiniteGroup(name, table, 0)


def centralizer(G: FiniteGroup, g: int) -> FiniteGroup:
    return subgroup(G, centralizer_elements(G, g), f"E({g})")


def class_multiplication(G: FiniteGroup, classes: Sequence[Sequence[int]] | None = None) -> np.ndarray:
    """``M[i, k, j]``: coefficient of class sum k in (class sum i)(class sum j)."""
    if classes is None:
        classes = conjugacy_classes(G)
    which = np.empty(G.order, dtype=np.int64)
    for c, cl in enumerate(classes):
        which[list(cl)] = c
    r = len(classes)
    M = np.zeros((r, r, r))
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            counts = np.bincount(which[G.table[np.ix_(ci, cj)].ravel()], minlength=r)
            sizes = np.array([len(c) for c in classes])
            M[i, :, j] = counts / sizes
    return M


def irrep_dimensions(G: FiniteGroup, seed: int = 0, attempts: int = 5) -> list[int]:
    """Sorted irrep dimensions; raises ``IrrepFailure`` rather than guess."""
    classes = conjugacy_classes(G)
    r = len(classes)
    sizes = np.array([len(c) for c in classes], dtype=float)
    if r == 1:
        return [1]
    M = class_multiplication(G, classes)
    rng = np.random.default_rng(seed)
    last = "no attempt"
    for _ in range(attempts):
        coef = rng.standard_normal(r)
        L = np.tensordot(coef, M, axes=1)
        w, V = np.linalg.eig(L)
        gaps = np.abs(w[:, None] - w[None, :]) + np.eye(r) * 1e9
        if gaps.min() < 1e-6:
            last = "degenerate random class-sum combination"
            continue
        dims = []
        ok = True
        for c in range(r):
            v = V[:, c]
            k = int(np.argmax(np.abs(v)))
            omega = np.array([(M[i] @ v)[k] / v[k] for i in range(r)])
            denom = float(np.sum(np.abs(omega) ** 2 / sizes))
            d2 = G.order / denom
            d = math.sqrt(d2)
            dr = round(d)
            if abs(d - dr) > 1e-6 or dr < 1:
                ok = False
                last = f"dimension {d:.8f} is not an integer"
                break
            dims.append(dr)
        if not ok:
            continue
        if sum(x * x for x in dims) != G.order:
            last = "sum rule failed"
            continue
        return sorted(dims)
    raise IrrepFailure(f"irrep dimensions of {G.name} unresolved after {attempts} seeds: {last}")


# --------------------------------------------------------------------------
# anyons and closed forms


@dataclass(frozen=True)
class AnyonLabel:
    class_rep: int
    class_size: int
    centralizer_order: int
    irrep_index: int
    irrep_dim: int

    @property
    def quantum_dim(self) -> int:
        return self.irrep_dim * self.class_size

    @property
    def name(self) -> str:
        return f"(C{self.class_rep},R{self.irrep_index})"


@dataclass
class AnyonTable:
    group: FiniteGroup
    labels: list[AnyonLabel]

    @property
    def total_dim_sq(self) -> int:
        return sum(a.quantum_dim**2 for a in self.labels)

    @property
    def vacuum(self) -> AnyonLabel:
        return self.labels[0]

    def __len__(self) -> int:
        return len(self.labels)


def anyon_table(G: FiniteGroup, seed: int = 0) -> AnyonTable:
    labels = []
    for cls in conjugacy_classes(G):
        rep = cls[0]
        E = centralizer(G, rep)
        if len(cls) * E.order != G.order:
            raise GroupError("orbit-stabilizer count failed")
        dims = irrep_dimensions(E, seed)
        # trivial irrep (dimension 1) first so the vacuum label leads
        for i, nR in enumerate(dims):
            labels.append(AnyonLabel(rep, len(cls), E.order, i, nR))
    tab = AnyonTable(G, labels)
    if tab.total_dim_sq != G.order**2:
        raise AssertionError(f"sum of d^2 is {tab.total_dim_sq}, expected {G.order ** 2}")
    return tab


@dataclass
class ThinAnnulusDims:
    total: int
    vacuum: int
    per_label: dict[str, int]

    def as_dict(self) -> dict:
        return {"total": self.total, "vacuum": self.vacuum, "per_label": dict(self.per_label)}


def thin_annulus_dims(G: FiniteGroup, nprime: int, Nprime: int, table: AnyonTable | None = None) -> ThinAnnulusDims:
    """Ground-space dimensions of the thin annulus: all sectors and vacuum."""
    if nprime < 2 or Nprime < 2:
        raise GroupError("n' and N' must be at least 2")
    if table is None:
        table = anyon_table(G)
    base = G.order ** (nprime + Nprime - 2)
    per = {a.name: a.quantum_dim**2 * base for a in table.labels}
    total = G.order ** (nprime + Nprime)
    if sum(per.values()) != total:
        raise AssertionError("sector dimensions do not add up to the total")
    return ThinAnnulusDims(total, base, per)


@dataclass(frozen=True)
class QDInvariant:
    ratio: Fraction

    @property
    def bits(self) -> float:
        return math.log2(self.ratio)


def invariant_qd(G: FiniteGroup, table: AnyonTable | None = None) -> QDInvariant:
    """``log2(total / vacuum)``, equal to ``log2 |G|^2``."""
    dims = thin_annulus_dims(G, 2, 2, table)
    ratio = Fraction(dims.total, dims.vacuum)
    if ratio != G.order**2:
        raise AssertionError("thin-annulus ratio differs from |G|^2")
    return QDInvariant(ratio)


def sector_probabilities(G: FiniteGroup, nprime: int = 2, Nprime: int = 2, table: AnyonTable | None = None) -> dict[str, Fraction]:
    if table is None:
        table = anyon_table(G)
    dims = thin_annulus_dims(G, nprime, Nprime, table)
    return {k: Fraction(v, dims.total) for k, v in dims.per_label.items()}


def boundary_counts(aplus: Sequence[int], hole: Sequence[int], faces: Sequence[Sequence[int]]) -> tuple[int, int]:
    """``(n', N')`` for a thin annulus: faces that meet ``A_+`` without lying
    inside it, split by whether they reach into ``hole`` or the outside.

    Each such face leaves one boundary holonomy of ``A_+`` unconstrained.
    """
    ap = set(aplus)
    hs = set(hole)
    inner = outer = 0
    for f in faces:
        fs = set(f)
        if fs <= ap or not (fs & ap):
            continue
        if fs & hs - ap:
            inner += 1
        else:
            outer += 1
    return inner, outer


def group_summary(G: FiniteGroup) -> dict:
    tab = anyon_table(G)
    inv = invariant_qd(G, tab)
    return {
        "group": G.name,
        "order": G.order,
        "classes": [len(c) for c in conjugacy_classes(G)],
        "irrep_dims": irrep_dimensions(G),
        "n_anyons": len(tab),
        "quantum_dims": [a.quantum_dim for a in tab.labels],
        "total_dim_sq": tab.total_dim_sq,
        "invariant_bits": inv.bits,
        "invariant_ratio": str(inv.ratio),
        "abelian": G.is_abelian(),
    }


__all__ = [name for name in dir() if not name.startswith("_") and name not in {"annotations", "math", "np"}]
