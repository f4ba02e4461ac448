"""Pauli words over GF(2) with exact phase tracking, Pauli groups and
stabilizer models.

A word is ``i**phase * X^x Z^z`` where ``X^x Z^z`` is the site-wise
product ``prod_j X_j^{x_j} Z_j^{z_j}``. Ranks and subgroup extraction work
modulo phases; phases are carried alongside and recomputed exactly when
products are formed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .lattice import CellComplex, Region


class PauliError(ValueError):
    pass


def _bits(a, n: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=np.uint8) & 1
    if n is not None and arr.shape != (n,):
        raise PauliError(f"expected bit-vector of length {n}, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PauliWord:
    x: np.ndarray
    z: np.ndarray
    phase: int = 0

    def __post_init__(self):
        x = _bits(self.x)
        z = _bits(self.z, len(x))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_sites(cls, n: int, xs: Iterable[int] = (), zs: Iterable[int] = (), sign: int = 1) -> "PauliWord":
        """Hermitian word with X on ``xs`` and Z on ``zs`` (Y where both)."""
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        x[list(xs)] = 1
        z[list(zs)] = 1
        n_y = int(np.sum(x & z))
        return cls(x, z, n_y + (0 if sign > 0 else 2))

    @classmethod
    def from_vector(cls, v: np.ndarray, phase: int = 0) -> "PauliWord":
        v = np.asarray(v, dtype=np.uint8)
        n = len(v) // 2
        return cls(v[:n], v[n:], phase)

    @classmethod
    def from_str(cls, text: str, n: int) -> "PauliWord":
        """Parse literals like ``"X3·Z7"``, ``"-Y0 Z1"`` or ``"I"``."""
        s = text.strip()
        phase = 0
        m = re.match(r"^([+-]?)(i?)\s*", s)
        if m:
            if m.group(1) == "-":
                phase += 2
            if m.group(2):
                phase += 1
            s = s[m.end():]
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        n_y = 0
        for tok in re.split(r"[·*\s]+", s):
            if not tok or tok == "I":
                continue
            mt = re.fullmatch(r"([XYZ])(\d+)", tok)
            if not mt:
                raise PauliError(f"bad Pauli token {tok!r}")
            op, j = mt.group(1), int(mt.group(2))
            if j >= n:
                raise PauliError(f"site {j} out of range for n={n}")
            if x[j] or z[j]:
                raise PauliError(f"site {j} repeated")
            if op in "XY":
                x[j] = 1
            if op in "YZ":
                z[j] = 1
            n_y += op == "Y"
        return cls(x, z, phase + n_y)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.z])

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.x | self.z)[0])

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def n_y(self) -> int:
        return int(np.sum(self.x & self.z))

    def is_hermitian(self) -> bool:
        return (self.phase - self.n_y) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 relative to the standard X/Y/Z product; Hermitian words only."""
        d = (self.phase - self.n_y) % 4
        if d == 0:
            return 1
        if d == 2:
            return -1
        raise PauliError("sign is only defined for Hermitian words")

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def same_operator_mod_phase(self, other: "PauliWord") -> bool:
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliWord):
            return NotImplemented
        return self.phase == other.phase and self.same_operator_mod_phase(other)

    def __hash__(self) -> int:
        return hash((self.phase, self.x.tobytes(), self.z.tobytes()))

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return multiply(self, other)

    def __neg__(self) -> "PauliWord":
        return PauliWord(self.x, self.z, self.phase + 2)

    def __str__(self) -> str:
        d = (self.phase - self.n_y) % 4
        prefix = ["", "i", "-", "-i"][d]
        toks = []
        for j in self.support:
            letter = "Y" if self.x[j] and self.z[j] else ("X" if self.x[j] else "Z")
            toks.append(f"{letter}{j}")
        body = "·".join(toks) if toks else "I"
        return prefix + body

    def __repr__(self) -> str:
        return f"PauliWord({self})"

    def to_dense(self) -> np.ndarray:
        """Dense ``2**n`` matrix; site 0 is the most significant qubit."""
        if self.n > 14:
            raise PauliError("dense materialization capped at 14 qubits")
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Z = np.array([[1, 0], [0, -1]], dtype=complex)
        out = np.array([[1.0 + 0j]])
        for j in range(self.n):
            f = np.eye(2, dtype=complex)
            if self.x[j]:
                f = f @ X
            if self.z[j]:
                f = f @ Z
            out = np.kron(out, f)
        return (1j ** self.phase) * out

    def restricted(self, sites: Sequence[int]) -> "PauliWord":
        """The word on the listed sites only (phase kept)."""
        idx = np.asarray(sites, dtype=np.intp)
        return PauliWord(self.x[idx], self.z[idx], self.phase)


def symplectic_product(p: PauliWord, q: PauliWord) -> int:
    if p.n != q.n:
        raise PauliError("length mismatch")
    return int((np.dot(p.x, q.z) + np.dot(p.z, q.x)) % 2)


def multiply(p: PauliWord, q: PauliWord) -> PauliWord:
    if p.n != q.n:
        raise PauliError("length mismatch")
    # Z^{z1} X^{x2} = (-1)^{z1.x2} X^{x2} Z^{z1}
    extra = 2 * int(np.dot(p.z.astype(np.int64), q.x))
    return PauliWord(p.x ^ q.x, p.z ^ q.z, p.phase + q.phase + extra)


def words_matrix(words: Sequence[PauliWord], n: int | None = None) -> np.ndarray:
    if not words:
        return np.zeros((0, 2 * (n or 0)), dtype=np.uint8)
    return np.stack([w.vector for w in words]).astype(np.uint8)


def rank(words: Sequence[PauliWord]) -> int:
    if not words:
        return 0
    lens = {w.n for w in words}
    if len(lens) != 1:
        raise PauliError("length mismatch")
    return gf2.rank(words_matrix(words))


def commutation_matrix(words: Sequence[PauliWord], others: Sequence[PauliWord] | None = None) -> np.ndarray:
    a = words_matrix(words)
    b = a if others is None else words_matrix(others)
    n = a.shape[1] // 2
    swapped = np.concatenate([b[:, n:], b[:, :n]], axis=1)
    return gf2.matmul(a, swapped.T)


def product(words: Sequence[PauliWord], coeffs: np.ndarray | None = None, n: int | None = None) -> PauliWord:
    """Ordered product of the words selected by a 0/1 coefficient vector."""
    if coeffs is None:
        sel = list(words)
    else:
        sel = [w for w, c in zip(words, coeffs) if c]
    if not sel:
        if n is None:
            n = words[0].n
        return PauliWord.identity(n)
    acc = sel[0]
    for w in sel[1:]:
        acc = multiply(acc, w)
    return acc


class PauliGroup:
    """Group generated by a list of Pauli words (phases kept on generators)."""

    def __init__(self, generators: Sequence[PauliWord], n: int | None = None):
        self.generators = list(generators)
        if n is None:
            if not self.generators:
                raise PauliError("empty group needs an explicit n")
            n = self.generators[0].n
        if any(g.n != n for g in self.generators):
            raise PauliError("length mismatch")
        self.n = n

    def __len__(self) -> int:
        return len(self.generators)

    @cached_property
    def matrix(self) -> np.ndarray:
        return words_matrix(self.generators, self.n)

    @cached_property
    def rank(self) -> int:
        return gf2.rank(self.matrix) if len(self.generators) else 0

    def express(self, word: PauliWord) -> np.ndarray | None:
        """Coefficients ``c`` with ``prod g_i^{c_i} = word`` up to phase."""
        if not self.generators:
            return np.zeros(0, np.uint8) if word.is_identity() else None
        return gf2.solve_left(self.matrix, word.vector)

    def contains(self, word: PauliWord) -> bool:
        """Membership modulo phase."""
        return self.express(word) is not None

    def signed_element(self, word: PauliWord) -> PauliWord | None:
        """The group element with the same X/Z pattern as ``word``, if any."""
        c = self.express(word)
        if c is None:
            return None
        return product(self.generators, c, self.n)

    def relations(self) -> np.ndarray:
        """Basis of coefficient vectors whose product is proportional to I."""
        if not self.generators:
            return np.zeros((0, 0), np.uint8)
        return gf2.left_kernel(self.matrix)

    def independent(self) -> "PauliGroup":
        """Canonical independent generating set (RREF over the X|Z bits)."""
        if not self.generators:
            return PauliGroup([], self.n)
        m = len(self.generators)
        aug = np.concatenate([self.matrix, np.eye(m, dtype=np.uint8)], axis=1)
        red, piv = gf2.rref(aug, ncols=2 * self.n)
        gens = [product(self.generators, red[i, 2 * self.n:], self.n) for i in range(len(piv))]
        return PauliGroup(gens, self.n)

    def subgroup_supported_in(self, R: Region | Iterable[int]) -> "PauliGroup":
        """Independent generators of ``{g in group : supp(g) within R}``."""
        sites = set(R.sites if isinstance(R, Region) else R)
        if not self.generators:
            return PauliGroup([], self.n)
        outside = np.array([j for j in range(self.n) if j not in sites], dtype=np.intp)
        cols = np.concatenate([outside, outside + self.n])
        sub = self.matrix[:, cols]
        ker = gf2.left_kernel(sub)
        if ker.shape[0] == 0:
            return PauliGroup([], self.n)
        elems = gf2.matmul(ker, self.matrix)
        aug = np.concatenate([elems, ker], axis=1)
        red, piv = gf2.rref(aug, ncols=2 * self.n)
        gens = [product(self.generators, red[i, 2 * self.n:], self.n) for i in range(len(piv))]
        return PauliGroup(gens, self.n)

    def is_abelian(self) -> bool:
        if not self.generators:
            return True
        return not commutation_matrix(self.generators).any()

    def contains_minus_identity(self) -> bool:
        """For a commuting group: does some product of generators equal -I?"""
        for c in self.relations():
            if product(self.generators, c, self.n).phase != 0:
                return True
        return False

    def enumerate(self) -> list[PauliWord]:
        """All distinct elements modulo phase (independent generators); small groups only."""
        ind = self.independent()
        if ind.rank > 16:
            raise PauliError("enumeration capped at 2^16 elements")
        out = [PauliWord.identity(self.n)]
        for g in ind.generators:
            out = out + [multiply(w, g) for w in out]
        return out


@dataclass
class StabilizerModel:
    """Commuting Pauli projector Hamiltonian ``H = -sum_j (I + g_j)/2``."""

    lattice: CellComplex
    generators: list[PauliWord]
    name: str = "custom"
    kinds: list[str] = field(default_factory=list)

    def __post_init__(self):
        n = self.lattice.n_sites
        for g in self.generators:
            if g.n != n:
                raise PauliError("generator length does not match the lattice")
            if not g.is_hermitian():
                raise PauliError(f"generator {g} is not Hermitian")
        if self.generators and commutation_matrix(self.generators).any():
            raise PauliError("generators do not pairwise commute")
        if self.group.contains_minus_identity():
            raise PauliError("frustrated model: generators multiply to -I")
        if not self.kinds:
            self.kinds = ["term"] * len(self.generators)

    @property
    def n(self) -> int:
        return self.lattice.n_sites

    @cached_property
    def group(self) -> PauliGroup:
        return PauliGroup(self.generators, self.lattice.n_sites)

    @cached_property
    def supports(self) -> list[tuple[int, ...]]:
        return [g.support for g in self.generators]

    def local_indices(self, R: Region | Iterable[int]) -> list[int]:
        """Indices of generators whose support lies inside ``R``."""
        sites = R.siteset if isinstance(R, Region) else frozenset(R)
        return [j for j, s in enumerate(self.supports) if sites.issuperset(s)]

    def local_group(self, R: Region | Iterable[int]) -> PauliGroup:
        return PauliGroup([self.generators[j] for j in self.local_indices(R)], self.n)


def toric_model(lat: CellComplex) -> StabilizerModel:
    n = lat.n_sites
    gens = [PauliWord.from_sites(n, xs=s) for s in lat.stars]
    gens += [PauliWord.from_sites(n, zs=p) for p in lat.plaquettes]
    kinds = ["star"] * len(lat.stars) + ["plaquette"] * len(lat.plaquettes)
    return StabilizerModel(lat, gens, "toric", kinds)


def trivial_model(lat: CellComplex) -> StabilizerModel:
    """Each site projected onto |0>, i.e. terms (I + Z_j)/2."""
    n = lat.n_sites
    gens = [PauliWord.from_sites(n, zs=[j]) for j in range(n)]
    return StabilizerModel(lat, gens, "trivial", ["site"] * n)


def build_model(name: str, lat: CellComplex) -> StabilizerModel:
    if name == "toric":
        return toric_model(lat)
    if name == "trivial":
        return trivial_model(lat)
    raise PauliError(f"unknown model {name!r}")
