"""Random constant-depth Clifford circuits on the torus.

Every layer tiles the edges with disjoint four-site blocks: the stars of
one vertex parity or the plaquettes of one cell parity. Layers cycle
through star-even, plaquette-even, star-odd and plaquette-odd, so the
blocks of consecutive layers overlap and operators spread. A block has
lattice diameter one, so a depth-``M`` circuit has range ``r = M``.

Gates are uniformly random Cliffords on their block: a random symplectic
matrix drawn column pair by column pair, plus random signs. Conjugation
of Pauli words goes through a per-gate lookup table indexed by the local
``(x, z)`` pattern.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import Annulus, GeometryError, Lattice
from .pauli import PauliError, PauliWord, StabilizerModel
from .sectors import GroundStateChoice, default_choice, invariant_bits

TILINGS = ("star-even", "plaq-even", "star-odd", "plaq-odd")
FORMAT_HEADER = "# entinv circuit v1"


class CircuitError(ValueError):
    """Malformed circuit or unsupported lattice."""


def _symplectic_form(k: int) -> np.ndarray:
    # ordering of generators: X_0, Z_0, X_1, Z_1, ...
    J = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for j in range(k):
        J[2 * j, 2 * j + 1] = J[2 * j + 1, 2 * j] = 1
    return J


def _vec_product(u: np.ndarray, v: np.ndarray, k: int) -> int:
    # vectors are (x_0..x_{k-1}, z_0..z_{k-1})
    return int((u[:k] @ v[k:] + u[k:] @ v[:k]) & 1)


def random_symplectic(k: int, rng: np.random.Generator) -> np.ndarray:
    """Rows are images of ``X_0, Z_0, X_1, Z_1, ...`` as ``(x|z)`` vectors.

    Each row is uniform over the nonzero vectors with the required products
    against the earlier rows; candidates are drawn in batches.
    """
    J = _symplectic_form(k)
    rows = np.zeros((0, 2 * k), dtype=np.int64)
    for i in range(2 * k):
        batch = 1 << min(i + 3, 12)
        while True:
            cand = rng.integers(0, 2, (batch, 2 * k), dtype=np.int64)
            prods = (cand[:, :k] @ rows[:, k:].T + cand[:, k:] @ rows[:, :k].T) & 1
            ok = np.nonzero((prods == J[i, :i]).all(axis=1) & cand.any(axis=1))[0]
            if len(ok):
                rows = np.vstack([rows, cand[ok[0]]])
                break
    return rows.astype(np.uint8)


def is_symplectic(S: np.ndarray) -> bool:
    k = S.shape[0] // 2
    J = _symplectic_form(k)
    for i in range(2 * k):
        for j in range(2 * k):
            if _vec_product(S[i], S[j], k) != J[i, j]:
                return False
    return True


@dataclass
class CliffordGate:
    sites: tuple[int, ...]
    symplectic: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        k = len(self.sites)
        self.symplectic = np.asarray(self.symplectic, dtype=np.uint8)
        self.signs = np.asarray(self.signs, dtype=np.uint8)
        if self.symplectic.shape != (2 * k, 2 * k) or self.signs.shape != (2 * k,):
            raise CircuitError("gate data does not match its support")
        if not is_symplectic(self.symplectic):
            raise CircuitError("gate matrix is not symplectic")
        self._table = None

    @property
    def k(self) -> int:
        return len(self.sites)

    def images(self) -> list[PauliWord]:
        """Images of ``X_0, Z_0, X_1, Z_1, ...`` as Hermitian local words."""
        k = self.k
        out = []
        for row, s in zip(self.symplectic, self.signs):
            n_y = int(np.sum(row[:k] & row[k:]))
            out.append(PauliWord(row[:k], row[k:], n_y + 2 * int(s)))
        return out

    def table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Lookup over local patterns ``X^x Z^z`` (index = x bits then z bits,
        site 0 most significant): image bits and phase increment."""
        if self._table is not None:
            return self._table
        k = self.k
        size = 4**k
        idx = np.arange(size)
        tx = np.zeros((size, k), dtype=np.uint8)
        tz = np.zeros((size, k), dtype=np.uint8)
        tp = np.zeros(size, dtype=np.int64)
        imgs = self.images()
        # all X generators first, then all Z generators
        order = [imgs[2 * j] for j in range(k)] + [imgs[2 * j + 1] for j in range(k)]
        for b, g in enumerate(order):
            on = ((idx >> (2 * k - 1 - b)) & 1).astype(bool)
            gx = g.x.astype(np.int64)
            tp[on] += g.phase + 2 * (tz[on].astype(np.int64) @ gx)
            tx[on] ^= g.x
            tz[on] ^= g.z
        tp %= 4
        self._table = (tx, tz, tp)
        return self._table

    def matrix(self) -> np.ndarray:
        """Dense unitary (up to a global phase) on the gate's support."""
        from .oracle import clifford_unitary

        return clifford_unitary(self.images())


@dataclass
class Circuit:
    lattice: Lattice
    layers: list[list[CliffordGate]]
    seed: int | None = None
    tilings: list[str] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def range(self) -> int:
        return self.depth

    def gates(self):
        for layer in self.layers:
            yield from layer

    # serialization --------------------------------------------------------

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(FORMAT_HEADER + "\n")
        buf.write(f"lattice {self.lattice.Lx}x{self.lattice.Ly}\n")
        buf.write(f"depth {self.depth}\n")
        buf.write(f"seed {self.seed if self.seed is not None else '-'}\n")
        for li, layer in enumerate(self.layers):
            tag = self.tilings[li] if li < len(self.tilings) else "custom"
            buf.write(f"layer {li} {tag} {len(layer)}\n")
            for g in layer:
                sites = ",".join(str(s) for s in g.sites)
                rows = " ".join("".join(str(b) for b in r) for r in g.symplectic)
                signs = "".join(str(b) for b in g.signs)
                buf.write(f"gate {sites} | {rows} | {signs}\n")
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != FORMAT_HEADER:
            raise CircuitError("missing circuit header")
        try:
            Lx, Ly = (int(v) for v in lines[1].split()[1].split("x"))
            depth = int(lines[2].split()[1])
            sv = lines[3].split()[1]
            seed = None if sv == "-" else int(sv)
        except (IndexError, ValueError) as exc:
            raise CircuitError("malformed circuit preamble") from exc
        layers: list[list[CliffordGate]] = []
        tilings: list[str] = []
        for ln in lines[4:]:
            if ln.startswith("layer"):
                parts = ln.split()
                tilings.append(parts[2])
                layers.append([])
            elif ln.startswith("gate"):
                body = ln[len("gate"):]
                sites_s, rows_s, signs_s = (p.strip() for p in body.split("|"))
                sites = tuple(int(s) for s in sites_s.split(","))
                rows = np.array([[int(c) for c in r] for r in rows_s.split()], dtype=np.uint8)
                signs = np.array([int(c) for c in signs_s], dtype=np.uint8)
                layers[-1].append(CliffordGate(sites, rows, signs))
            else:
                raise CircuitError(f"unexpected line {ln!r}")
        if len(layers) != depth:
            raise CircuitError("layer count does not match depth")
        return cls(Lattice(Lx, Ly), layers, seed, tilings)


def tiling_blocks(lat: Lattice, tiling: str) -> list[tuple[int, ...]]:
    """Disjoint four-site blocks covering every edge."""
    if lat.Lx % 2 or lat.Ly % 2:
        raise CircuitError("block tilings need even torus dimensions")
    kind, parity = tiling.split("-")
    want = 0 if parity == "even" else 1
    out = []
    for y in range(lat.Ly):
        for x in range(lat.Lx):
            if (x + y) % 2 != want:
                continue
            out.append(lat.star(x, y) if kind == "star" else lat.plaquette(x, y))
    return out


def random_circuit(lat: Lattice, depth: int, seed: int) -> Circuit:
    if depth < 0:
        raise CircuitError("depth must be >= 0")
    rng = np.random.default_rng(seed)
    layers, tags = [], []
    for li in range(depth):
        tag = TILINGS[li % len(TILINGS)]
        layer = []
        for block in tiling_blocks(lat, tag):
            k = len(block)
            S = random_symplectic(k, rng)
            signs = rng.integers(0, 2, 2 * k, dtype=np.uint8)
            layer.append(CliffordGate(tuple(block), S, signs))
        layers.append(layer)
        tags.append(tag)
    return Circuit(lat, layers, seed, tags)


# --------------------------------------------------------------------------
# conjugation


def _conjugate_arrays(c: Circuit, X: np.ndarray, Z: np.ndarray, P: np.ndarray) -> None:
    """In place: rows ``i^P X^X Z^Z`` -> ``W (row) W^dagger``."""
    for g in c.gates():
        k = g.k
        tx, tz, tp = g.table()
        s = list(g.sites)
        xb, zb = X[:, s].astype(np.int64), Z[:, s].astype(np.int64)
        w = 1 << np.arange(2 * k - 1, -1, -1)
        idx = np.concatenate([xb, zb], axis=1) @ w
        X[:, s] = tx[idx]
        Z[:, s] = tz[idx]
        P += tp[idx]
        P %= 4


def conjugate_words(c: Circuit, words: Sequence[PauliWord]) -> list[PauliWord]:
    if not words:
        return []
    n = c.lattice.n_sites
    if any(w.n != n for w in words):
        raise PauliError("word length does not match the circuit lattice")
    X = np.array([w.x for w in words], dtype=np.uint8)
    Z = np.array([w.z for w in words], dtype=np.uint8)
    P = np.array([w.phase for w in words], dtype=np.int64)
    _conjugate_arrays(c, X, Z, P)
    return [PauliWord(X[i], Z[i], int(P[i])) for i in range(len(words))]


def conjugate_pauli(c: Circuit, p: PauliWord) -> PauliWord:
    return conjugate_words(c, [p])[0]


def conjugate_model(c: Circuit, m: StabilizerModel) -> StabilizerModel:
    if m.lattice != c.lattice:
        raise CircuitError("circuit and model live on different lattices")
    gens = conjugate_words(c, m.generators)
    return StabilizerModel(m.lattice, gens, m.name, list(m.kinds))


def conjugate_choice(c: Circuit, choice: GroundStateChoice) -> GroundStateChoice:
    return GroundStateChoice(conjugate_words(c, choice.words), choice.label + "+circuit")


# --------------------------------------------------------------------------
# invariance


@dataclass
class InvarianceResult:
    before_bits: int
    after_bits: int
    annulus_before: str
    annulus_after: str
    depth: int
    seed: int | None

    @property
    def passed(self) -> bool:
        return self.before_bits == self.after_bits

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "depth": self.depth,
            "range": self.depth,
            "annulus_before": self.annulus_before,
            "annulus_after": self.annulus_after,
            "before_bits": float(self.before_bits),
            "after_bits": float(self.after_bits),
            "pass": self.passed,
        }


def invariance_test(
    m: StabilizerModel,
    A_t: Annulus,
    c: Circuit,
    choice: GroundStateChoice | None = None,
    before_bits: int | None = None,
) -> InvarianceResult:
    """Invariant of ``A_t`` before the circuit against ``A_{t-r}`` after it.

    ``before_bits`` skips recomputing the unconjugated side in seed sweeps.
    """
    if choice is None:
        choice = default_choice(m)
    r = c.range
    if A_t.width - r < 2:
        raise GeometryError(f"shrunken annulus width {A_t.width - r} < 2")
    A_s = A_t.shrink(r)
    if before_bits is None:
        before_bits = int(invariant_bits(m, A_t, choice).value_bits)
    after = invariant_bits(conjugate_model(c, m), A_s, conjugate_choice(c, choice))
    return InvarianceResult(before_bits, int(after.value_bits), A_t.describe(), A_s.describe(), c.depth, c.seed)
