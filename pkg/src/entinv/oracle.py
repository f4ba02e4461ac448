"""Brute-force Hilbert-space oracle.

Terms are stored as small matrices on their support and applied to state
vectors of up to ``MAX_SITES`` sites without building the full operator.
Full matrices are only materialized up to ``MAX_DENSE_DIM``.

Ranks of ground projectors come from one of three exact routes:

* trace of the materialized projector (small spaces),
* orbit counting over the configuration basis when every term is either a
  diagonal 0/1 projector or an average over a permutation group (toric
  code and quantum doubles are of this kind; the invariant subspace of a
  permutation module has one vector per orbit),
* a randomized range finder whose numerical rank is confirmed by
  checking that the recovered basis is fixed by the projector.

Site ordering: site ``sites[0]`` is the most significant digit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .lattice import Annulus, CellComplex, Region, fatten
from .pauli import PauliGroup, PauliWord, StabilizerModel
from .sectors import GroundStateChoice, default_choice, logical_algebra

MAX_SITES = 22
MAX_DENSE_DIM = 2**14
EIG_CUTOFF = 1e-12
ENTROPY_CUTOFF = 1e-14
EIG_RESIDUAL = 1e-10
QDOUBLE_CAP = 2_000_000


class OracleError(RuntimeError):
    """Numerical check failed or input is malformed."""


class SizeCapError(OracleError):
    """Instance is beyond the brute-force size caps."""


# --------------------------------------------------------------------------
# operators


@dataclass
class DenseOperator:
    """Operator on ``support`` (global site labels) with local dimension ``d``.

    ``diag`` marks a diagonal 0/1 projector; ``perms`` marks the average of
    a permutation group acting on local configurations. Either enables the
    orbit-count rank route.
    """

    support: tuple[int, ...]
    matrix: np.ndarray | sp.spmatrix
    d: int = 2
    label: str = ""
    projector: bool = False
    hermitian: bool = False
    diag: np.ndarray | None = field(default=None, repr=False)
    perms: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.support = tuple(int(s) for s in self.support)
        dim = self.d ** len(self.support)
        if self.matrix.shape != (dim, dim):
            raise OracleError(f"matrix shape {self.matrix.shape} does not match support of size {len(self.support)}")
        if self.projector:
            self.hermitian = True
            m = self.matrix
            if dim <= 4096:
                md = m.toarray() if sp.issparse(m) else m
                if np.abs(md @ md - md).max(initial=0.0) > 1e-12:
                    raise OracleError(f"{self.label or 'term'} is not idempotent")
                if np.abs(md - md.conj().T).max(initial=0.0) > 1e-12:
                    raise OracleError(f"{self.label or 'term'} is not Hermitian")

    @property
    def dim(self) -> int:
        return self.d ** len(self.support)

    @property
    def monomial(self) -> bool:
        return self.diag is not None or self.perms is not None

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    # constructors ---------------------------------------------------------

    @classmethod
    def from_diag(cls, support: Sequence[int], mask: np.ndarray, d: int = 2, label: str = "") -> "DenseOperator":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(support), sp.diags(mask.astype(float)).tocsr(), d, label, True, True, diag=mask)

    @classmethod
    def from_group_average(cls, support: Sequence[int], perms: np.ndarray, d: int = 2, label: str = "") -> "DenseOperator":
        """``(1/|H|) sum_h P_h`` for a permutation group ``H`` given as rows."""
        perms = np.asarray(perms, dtype=np.int64)
        m, dim = perms.shape
        ident = np.arange(dim)
        if not any((p == ident).all() for p in perms):
            raise OracleError("permutation set lacks the identity")
        # P_h |c> = |h(c)>, so entry (h(c), c)
        rows = perms.reshape(-1)
        cols = np.tile(ident, m)
        mat = sp.csr_matrix((np.full(rows.size, 1.0 / m), (rows, cols)), shape=(dim, dim))
        return cls(tuple(support), mat, d, label, True, True, perms=perms)

    @classmethod
    def from_pauli(cls, word: PauliWord, support: Sequence[int] | None = None, label: str = "") -> "DenseOperator":
        """The Pauli word itself, restricted to ``support`` (default: its support)."""
        sup = tuple(word.support) if support is None else tuple(support)
        if set(word.support) - set(sup):
            raise OracleError("word acts outside the requested support")
        if len(sup) > 14:
            raise SizeCapError("Pauli word support too large for a local matrix")
        return cls(sup, word.restricted(sup).to_dense(), 2, label or str(word), hermitian=word.is_hermitian())

    @classmethod
    def pauli_projector(cls, word: PauliWord, sign: int = 1, label: str = "") -> "DenseOperator":
        """``(I + sign*word)/2`` with a monomial tag when the word is X- or Z-type."""
        if not word.is_hermitian():
            raise OracleError(f"{word} is not Hermitian")
        s = sign * word.sign
        sup = tuple(word.support)
        k = len(sup)
        if not sup:
            raise OracleError("identity word has no projector")
        x = np.asarray(word.x)[list(sup)]
        z = np.asarray(word.z)[list(sup)]
        if not x.any():
            # diagonal: Z-parity over the selected local bits
            idx = np.arange(2**k)
            bits = (idx[:, None] >> (k - 1 - np.arange(k))) & 1
            par = (bits @ z.astype(np.int64)) & 1
            mask = (1 - 2 * par) * s > 0
            return cls.from_diag(sup, mask, 2, label or f"(I{'+' if s > 0 else '-'}{word.restricted(sup)})/2")
        if not z.any() and s > 0:
            flip = int("".join(str(b) for b in x), 2)
            idx = np.arange(2**k)
            return cls.from_group_average(sup, np.stack([idx, idx ^ flip]), 2, label or f"(I+{word})/2")
        mat = (np.eye(2**k) + s * word.restricted(sup).to_dense()) / 2
        return cls(sup, mat, 2, label or f"(I+{word})/2", projector=True)

    # application ----------------------------------------------------------

    def apply(self, X: np.ndarray, sites: Sequence[int]) -> np.ndarray:
        """Apply to columns of ``X`` (shape ``(d^n, b)``) over ``sites``."""
        return _apply_local(self.matrix, self.support, self.d, X, sites)

    def full(self, sites: Sequence[int]) -> np.ndarray:
        n = len(sites)
        dim = self.d**n
        if dim > MAX_DENSE_DIM:
            raise SizeCapError(f"refusing to materialize a {dim}-dimensional operator")
        return self.apply(np.eye(dim, dtype=complex), sites)


def _apply_local(mat, support, d, X, sites) -> np.ndarray:
    pos = {s: i for i, s in enumerate(sites)}
    try:
        axes = [pos[s] for s in support]
    except KeyError as exc:
        raise OracleError(f"operator site {exc.args[0]} not among the state sites") from exc
    n = len(sites)
    b = X.shape[1]
    k = len(axes)
    T = X.reshape((d,) * n + (b,))
    T = np.moveaxis(T, axes, list(range(k)))
    shp = T.shape
    M = T.reshape(d**k, -1)
    out = mat @ M
    out = np.asarray(out).reshape(shp)
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(d**n, b)


def commutator_norm(a: DenseOperator, b: DenseOperator) -> float:
    """Max-entry norm of ``[a, b]`` on the union of supports."""
    if a.d != b.d:
        raise OracleError("local dimensions differ")
    if set(a.support).isdisjoint(b.support):
        return 0.0
    sites = sorted(set(a.support) | set(b.support))
    dim = a.d ** len(sites)
    if dim <= 4096:
        I = np.eye(dim)
        ab = a.apply(b.apply(I, sites), sites)
        ba = b.apply(a.apply(I, sites), sites)
        return float(np.abs(ab - ba).max())
    rng = np.random.default_rng(0)
    X = rng.standard_normal((dim, 4))
    return float(np.abs(a.apply(b.apply(X, sites), sites) - b.apply(a.apply(X, sites), sites)).max())


# --------------------------------------------------------------------------
# term builders


def build_toric_terms(lat: CellComplex) -> list[DenseOperator]:
    """Projectors ``(I+A_v)/2`` and ``(I+B_p)/2`` of the toric code."""
    n = lat.n_sites
    if n > MAX_SITES:
        raise SizeCapError(f"{n} sites exceeds the {MAX_SITES}-site cap")
    out = []
    for v, star in zip(lat.star_vertices, lat.stars):
        out.append(DenseOperator.pauli_projector(PauliWord.from_sites(n, xs=star), label=f"A_{v}"))
    for f, plaq in enumerate(lat.plaquettes):
        out.append(DenseOperator.pauli_projector(PauliWord.from_sites(n, zs=plaq), label=f"B_{f}"))
    return out


def model_terms(model: StabilizerModel, region: Region | Iterable[int] | None = None) -> list[DenseOperator]:
    """Projectors ``(I+g)/2`` for the generators of ``model`` inside ``region``."""
    idx = range(len(model.generators)) if region is None else model.local_indices(region)
    return [DenseOperator.pauli_projector(model.generators[j], label=f"{model.kinds[j]}{j}") for j in idx]


# --------------------------------------------------------------------------
# ground projector


@dataclass
class GroundProjector:
    terms: list[DenseOperator]
    sites: tuple[int, ...]
    d: int = 2

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return self.d**self.n

    def apply(self, X: np.ndarray) -> np.ndarray:
        for t in self.terms:
            X = t.apply(X, self.sites)
        return X

    def matrix(self) -> np.ndarray:
        if self.dim > MAX_DENSE_DIM:
            raise SizeCapError(f"refusing to materialize a {self.dim}-dimensional projector")
        return self.apply(np.eye(self.dim, dtype=complex))

    @property
    def real(self) -> bool:
        return all(np.isrealobj(t.matrix) or not np.iscomplexobj(t.matrix) or np.abs(t.dense().imag).max(initial=0) == 0
                   for t in self.terms if t.dim <= 4096)

    def rank(self, seed: int = 0) -> int:
        if not self.terms:
            return self.dim
        if self.dim <= 4096:
            return int(round(np.trace(self.matrix()).real))
        if all(t.monomial for t in self.terms):
            return orbit_rank(self.terms, self.sites, self.d)
        return self.basis(seed).shape[1]

    def basis(self, seed: int = 0) -> np.ndarray:
        """Orthonormal basis of the range (columns)."""
        rng = np.random.default_rng(seed)
        return range_basis(self.apply, self.dim, rng)


def ground_projector(terms: Sequence[DenseOperator], sites: Sequence[int] | None = None, check: bool = True) -> GroundProjector:
    terms = list(terms)
    ds = {t.d for t in terms}
    if len(ds) > 1:
        raise OracleError("mixed local dimensions")
    d = ds.pop() if ds else 2
    if sites is None:
        sites = sorted({s for t in terms for s in t.support})
    sites = tuple(sites)
    if len(sites) > MAX_SITES and d == 2:
        raise SizeCapError(f"{len(sites)} sites exceeds the {MAX_SITES}-site cap")
    if d**len(sites) > max(QDOUBLE_CAP, 2**MAX_SITES):
        raise SizeCapError("configuration space too large")
    if check:
        for i, a in enumerate(terms):
            if not a.projector:
                raise OracleError(f"term {a.label} is not flagged as a projector")
            for b in terms[i + 1:]:
                if commutator_norm(a, b) > 1e-12:
                    raise OracleError(f"terms {a.label} and {b.label} do not commute")
    return GroundProjector(terms, sites, d)


def range_basis(apply: Callable[[np.ndarray], np.ndarray], dim: int, rng: np.random.Generator, start: int = 8) -> np.ndarray:
    """Orthonormal basis for the range of a projector given matrix-free."""
    k = min(start, dim)
    while True:
        X = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
        Y = apply(X)
        U, s, _ = np.linalg.svd(Y, full_matrices=False)
        top = s.max(initial=0.0)
        r = int(np.sum(s > 1e-8 * max(top, 1.0)))
        if r < k or k == dim:
            Q = U[:, :r]
            if r and np.abs(apply(Q) - Q).max() > 1e-9:
                raise OracleError("range basis is not fixed by the projector")
            return Q
        k = min(2 * k, dim)


def _digits(N: int, n: int, d: int) -> np.ndarray:
    idx = np.arange(N, dtype=np.int64)
    out = np.empty((N, n), dtype=np.int16)
    for j in range(n - 1, -1, -1):
        out[:, j] = idx % d
        idx //= d
    return out


def orbit_rank(terms: Sequence[DenseOperator], sites: Sequence[int], d: int, *, mask: np.ndarray | None = None) -> int:
    """Rank of a product of monomial projectors by counting orbits.

    Diagonal terms cut out a configuration set F; averaging terms generate
    a permutation group H leaving F invariant. The joint range is spanned
    by one uniform superposition per H-orbit inside F.
    """
    sites = tuple(sites)
    n = len(sites)
    N = d**n
    if N > max(QDOUBLE_CAP, 2**MAX_SITES):
        raise SizeCapError(f"{N} configurations exceed the brute-force cap")
    pos = {s: i for i, s in enumerate(sites)}
    dig = _digits(N, n, d)
    weights = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    keep = np.ones(N, dtype=bool) if mask is None else mask.copy()
    gens: list[np.ndarray] = []
    idx = np.arange(N, dtype=np.int64)
    for t in terms:
        if not t.monomial:
            raise OracleError(f"term {t.label} is neither diagonal nor a group average")
        ax = [pos[s] for s in t.support]
        k = len(ax)
        lw = t.d ** np.arange(k - 1, -1, -1, dtype=np.int64)
        local = dig[:, ax].astype(np.int64) @ lw
        if t.diag is not None:
            keep &= t.diag[local]
            continue
        for p in t.perms:
            if (p == np.arange(len(p))).all():
                continue
            new_local = p[local]
            new_dig = (new_local[:, None] // lw[None, :]) % t.d
            delta = (new_dig - dig[:, ax]) @ weights[ax]
            gens.append(idx + delta)
    labels = idx.copy()
    while True:
        before = labels
        for g in gens:
            labels = np.minimum(labels, labels[g])
        labels = labels[labels]
        if np.array_equal(before, labels):
            break
    return int(np.unique(labels[keep]).size) if keep.any() else 0


# --------------------------------------------------------------------------
# states and partial traces


@dataclass
class DensityMatrix:
    matrix: np.ndarray
    sites: tuple[int, ...]
    d: int = 2

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.d ** len(self.sites),) * 2:
            raise OracleError("density matrix shape does not match its sites")
        if abs(np.trace(m) - 1) > 1e-10:
            raise OracleError(f"trace {np.trace(m).real:.3g} != 1")
        if np.abs(m - m.conj().T).max(initial=0) > 1e-10:
            raise OracleError("density matrix is not Hermitian")

    def eigvalsh(self) -> np.ndarray:
        return _eigh_checked(self.matrix)[0]


def _eigh_checked(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(m)
    res = np.abs(m @ v - v * w).max(initial=0.0)
    if res > EIG_RESIDUAL:
        raise OracleError(f"eigen-decomposition residual {res:.2e} above tolerance")
    if w.size and w.min() < -1e-12 * max(1.0, abs(w).max()) - 1e-12:
        raise OracleError(f"negative eigenvalue {w.min():.3e}")
    return w, v


def reduce_columns(Q: np.ndarray, sites: Sequence[int], keep: Sequence[int], d: int = 2, weights: np.ndarray | None = None) -> np.ndarray:
    """``sum_k w_k Tr_{rest} |q_k><q_k|`` over the columns of ``Q``."""
    sites = tuple(sites)
    pos = {s: i for i, s in enumerate(sites)}
    ka = [pos[s] for s in keep]
    rest = [i for i in range(len(sites)) if i not in ka]
    n = len(sites)
    b = Q.shape[1]
    T = Q.reshape((d,) * n + (b,))
    T = np.transpose(T, ka + rest + [n])
    M = T.reshape(d ** len(ka), d ** len(rest), b)
    if weights is None:
        weights = np.ones(b)
    M = M * np.sqrt(np.asarray(weights))[None, None, :]
    M = M.reshape(d ** len(ka), -1)
    return M @ M.conj().T


def partial_trace(rho: DensityMatrix | np.ndarray, keep: Region | Sequence[int], sites: Sequence[int] | None = None, d: int = 2) -> DensityMatrix:
    """Reduce a density matrix (or pure state vector) onto ``keep``."""
    keep_t = tuple(keep.sites if isinstance(keep, Region) else keep)
    if isinstance(rho, DensityMatrix):
        mat, sites, d = rho.matrix, rho.sites, rho.d
    else:
        mat = np.asarray(rho)
        if sites is None:
            raise OracleError("sites are required for a bare array")
    sites = tuple(sites)
    if set(keep_t) - set(sites):
        raise OracleError("keep is not a subset of the support")
    n = len(sites)
    if mat.ndim == 1:
        red = reduce_columns(mat.reshape(-1, 1), sites, keep_t, d)
        return DensityMatrix(red, keep_t, d)
    if mat.shape != (d**n, d**n):
        raise OracleError("index mismatch between matrix and sites")
    pos = {s: i for i, s in enumerate(sites)}
    ka = [pos[s] for s in keep_t]
    rest = [i for i in range(n) if i not in ka]
    T = mat.reshape((d,) * (2 * n))
    T = np.transpose(T, ka + rest + [n + i for i in ka] + [n + i for i in rest])
    k, r = d ** len(ka), d ** len(rest)
    T = T.reshape(k, r, k, r)
    return DensityMatrix(np.einsum("ajbj->ab", T), keep_t, d)


def stabilizer_rdm(group: PauliGroup, keep: Region | Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep`` of the state (or flat mixture) stabilized by
    ``group``, built as an explicit matrix.

    The partial trace kills every group element that acts outside ``keep``,
    so the result is proportional to the product of ``(I + g)/2`` over
    generators of the elements supported inside ``keep``.
    """
    keep_t = tuple(keep.sites if isinstance(keep, Region) else keep)
    if len(keep_t) > 14:
        raise SizeCapError(f"{len(keep_t)} sites exceeds the 14-site cap for explicit reduced states")
    sub = group.subgroup_supported_in(keep_t)
    if sub.contains_minus_identity():
        raise OracleError("group contains -I; no state is stabilized")
    dim = 2 ** len(keep_t)
    P = np.eye(dim, dtype=complex)
    for g in sub.generators:
        P = P @ (np.eye(dim) + g.restricted(keep_t).to_dense()) / 2
    return DensityMatrix(P / np.real(np.trace(P)), keep_t)


def dense_cmi_bits(rho: DensityMatrix, X: Sequence[int], Y: Sequence[int], Z: Sequence[int]) -> float:
    """``I(X:Z|Y)`` of a dense state whose support is ``X u Y u Z``."""
    X, Y, Z = tuple(X), tuple(Y), tuple(Z)
    if set(X) & set(Y) or set(Y) & set(Z) or set(X) & set(Z):
        raise OracleError("regions overlap")
    if set(X + Y + Z) != set(rho.sites):
        raise OracleError("regions must cover the state's support")

    def S(R):
        return von_neumann_bits(partial_trace(rho, R)) if R else 0.0

    return S(X + Y) + S(Y + Z) - S(Y) - S(X + Y + Z)


def ground_state(model: StabilizerModel, choice: GroundStateChoice | None = None, seed: int = 0) -> np.ndarray:
    """The unique state fixed by the model terms and the choice words."""
    if model.n > MAX_SITES:
        raise SizeCapError(f"{model.n} sites exceeds the {MAX_SITES}-site cap")
    if choice is None:
        choice = default_choice(model)
    terms = model_terms(model) + [DenseOperator.pauli_projector(w, label=f"choice{i}") for i, w in enumerate(choice.words)]
    gp = GroundProjector(terms, tuple(range(model.n)))
    Q = gp.basis(seed)
    if Q.shape[1] != 1:
        raise OracleError(f"ground space has dimension {Q.shape[1]}, expected a unique state")
    return Q[:, 0]


def mixed_ground_state(gp: GroundProjector, keep: Sequence[int], seed: int = 0) -> DensityMatrix:
    """Reduced state of the normalized projector ``Pi / Tr Pi``."""
    Q = gp.basis(seed)
    r = Q.shape[1]
    if r == 0:
        raise OracleError("projector has empty range")
    return DensityMatrix(reduce_columns(Q, gp.sites, keep, gp.d) / r, tuple(keep), gp.d)


# --------------------------------------------------------------------------
# entropies


def von_neumann_bits(rho: DensityMatrix | np.ndarray) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else rho
    w = _eigh_checked(m)[0]
    w = w[w > ENTROPY_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def _support(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    return v[:, w > EIG_CUTOFF]


def relative_entropy_bits(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    """``Tr rho (log2 rho - log2 sigma)``; ``inf`` when supp rho is not inside supp sigma."""
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    s = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    if r.shape != s.shape:
        raise OracleError("dimension mismatch")
    wr, vr = _eigh_checked(r)
    ws, vs = _eigh_checked(s)
    supp_s = _support(ws, vs)
    supp_r = _support(wr, vr)
    leak = supp_r - supp_s @ (supp_s.conj().T @ supp_r)
    if leak.size and np.abs(leak).max() > 1e-6:
        return float("inf")
    pos = wr > ENTROPY_CUTOFF
    s_rho = float(np.sum(wr[pos] * np.log2(wr[pos])))
    keep = ws > EIG_CUTOFF
    log_s = (vs[:, keep] * np.log2(ws[keep])) @ vs[:, keep].conj().T
    cross = float(np.real(np.trace(r @ log_s)))
    return max(s_rho - cross, 0.0) if s_rho - cross > -1e-12 else s_rho - cross


def max_relative_entropy_bits(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    """``log2`` of the smallest ``lam`` with ``rho <= lam * sigma``."""
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    s = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    ws, vs = _eigh_checked(s)
    keep = ws > EIG_CUTOFF
    V = vs[:, keep]
    wr, vr = _eigh_checked(r)
    supp_r = _support(wr, vr)
    leak = supp_r - V @ (V.conj().T @ supp_r)
    if leak.size and np.abs(leak).max() > 1e-6:
        return float("inf")
    inv_sqrt = V / np.sqrt(ws[keep])
    C = inv_sqrt.conj().T @ r @ inv_sqrt
    lam = _eigh_checked(C)[0].max(initial=0.0)
    return float(np.log2(lam))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.abs(np.linalg.eigvalsh((a - b + (a - b).conj().T) / 2)).sum())


# --------------------------------------------------------------------------
# invariant through the dense route


@dataclass
class DenseInvariant:
    relative_entropy_bits: float
    max_relative_entropy_bits: float
    rank_aplus: int
    n_aplus: int
    n_a: int
    rho: DensityMatrix = field(repr=False)
    tau: DensityMatrix = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "route": "dense",
            "value_bits": self.relative_entropy_bits,
            "max_relative_entropy_bits": self.max_relative_entropy_bits,
            "rank_aplus": self.rank_aplus,
            "n_aplus": self.n_aplus,
            "n_a": self.n_a,
        }


def aplus_projector(model: StabilizerModel, A: Annulus | Region) -> GroundProjector:
    region = A.region if isinstance(A, Annulus) else A
    aplus = fatten(model.lattice, region, model.supports)
    if len(aplus) > MAX_SITES:
        raise SizeCapError(f"A_+ has {len(aplus)} sites, cap is {MAX_SITES}")
    return ground_projector(model_terms(model, aplus), aplus.sites)


def dense_invariant(model: StabilizerModel, A: Annulus | Region, choice: GroundStateChoice | None = None, seed: int = 0) -> DenseInvariant:
    """``S(rho_A || tau_A)`` with ``rho`` the global ground state and ``tau``
    proportional to the ground projector of the terms inside ``A_+``."""
    region = A.region if isinstance(A, Annulus) else A
    psi = ground_state(model, choice, seed)
    rho = partial_trace(psi, region.sites, tuple(range(model.n)))
    gp = aplus_projector(model, A)
    Q = gp.basis(seed + 1)
    tau = DensityMatrix(reduce_columns(Q, gp.sites, region.sites) / Q.shape[1], region.sites)
    return DenseInvariant(
        relative_entropy_bits(rho, tau),
        max_relative_entropy_bits(rho, tau),
        Q.shape[1],
        gp.n,
        len(region),
        rho,
        tau,
    )


# --------------------------------------------------------------------------
# sectors and structural checks


@dataclass
class SectorProjector:
    signs: tuple[int, ...]
    op: DenseOperator


def sector_projectors_dense(model: StabilizerModel, A: Annulus) -> list[SectorProjector]:
    """``prod_i (I + s_i W_i)/2`` over the loop representatives on ``A``."""
    la = logical_algebra(model, A)
    if not la.abelian:
        raise OracleError("non-abelian loop algebra")
    loops = la.basis
    if not loops:
        raise OracleError("annulus carries no loop operators")
    sup = tuple(sorted({s for w in loops for s in w.support}))
    if len(sup) > 12:
        raise SizeCapError(f"loop supports span {len(sup)} sites; too many for local matrices")
    mats = [w.restricted(sup).to_dense() for w in loops]
    I = np.eye(2 ** len(sup))
    out = []
    for signs in itertools.product((1, -1), repeat=len(loops)):
        P = I.astype(complex)
        for s, W in zip(signs, mats):
            P = P @ (I + s * W) / 2
        out.append(SectorProjector(signs, DenseOperator(sup, P, 2, f"P{signs}", projector=True)))
    return out


@dataclass
class ConvexReport:
    weights: list[float]
    off_block_norm: float
    passed: bool


def verify_convex_decomposition(sigma: DensityMatrix, projs: Sequence[SectorProjector], tol: float = 1e-10) -> ConvexReport:
    """Check ``sigma = sum_a P_a sigma P_a`` and report ``p_a = Tr P_a sigma``."""
    sites = sigma.sites
    ops = [p.op.apply(np.eye(sigma.matrix.shape[0], dtype=complex), sites) for p in projs]
    blocks = sum(P @ sigma.matrix @ P for P in ops)
    off = float(np.linalg.norm(sigma.matrix - blocks))
    w = [float(np.real(np.trace(P @ sigma.matrix))) for P in ops]
    ok = off < tol and abs(sum(w) - 1) < 1e-10
    return ConvexReport(w, off, ok)


def _random_in_range(Q: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal((Q.shape[1], k)) + 1j * rng.standard_normal((Q.shape[1], k))
    V = Q @ c
    return V / np.linalg.norm(V, axis=0)


def sector_basis(gp: GroundProjector, proj: SectorProjector, seed: int = 0) -> np.ndarray:
    sub = GroundProjector(gp.terms + [proj.op], gp.sites, gp.d)
    return sub.basis(seed)


@dataclass
class UniquenessReport:
    max_pairwise_distance: float
    k: int
    rank: int
    passed: bool


def verify_sector_rdm_uniqueness(model: StabilizerModel, A: Annulus, proj: SectorProjector, k: int = 10, seed: int = 0, tol: float = 1e-9) -> UniquenessReport:
    """Random states in one sector of the ``A_+`` ground space share the reduced state on ``A``."""
    gp = aplus_projector(model, A)
    Q = sector_basis(gp, proj, seed)
    rng = np.random.default_rng(seed)
    V = _random_in_range(Q, k, rng)
    reds = [reduce_columns(V[:, [j]], gp.sites, A.sites) for j in range(k)]
    dist = 0.0
    for a, b in itertools.combinations(reds, 2):
        dist = max(dist, trace_distance(a, b))
    return UniquenessReport(dist, k, Q.shape[1], dist < tol)


@dataclass
class TQOReport:
    residuals: list[float]
    coefficients: list[complex]
    passed: bool


def verify_tqo1(model: StabilizerModel, X: Region, k: int = 20, seed: int = 0, tol: float = 1e-9, observables: Sequence[np.ndarray] | None = None) -> TQOReport:
    """``Pi O Pi = c(O) Pi`` for random ``O`` on ``X``.

    ``Pi`` is the projector onto the full ground space of the model and
    ``c(O) = Tr(Pi_{X+} O) / Tr Pi_{X+}`` uses only the terms inside ``X_+``.
    """
    if model.n > MAX_SITES:
        raise SizeCapError("model too large for the dense route")
    aplus = fatten(model.lattice, X, model.supports)
    local = ground_projector(model_terms(model, aplus), aplus.sites)
    Ql = local.basis(seed)
    full = GroundProjector(model_terms(model), tuple(range(model.n)))
    Q = full.basis(seed + 1)
    r = Q.shape[1]
    rng = np.random.default_rng(seed)
    dx = 2 ** len(X)
    if observables is None:
        observables = []
        for _ in range(k):
            G = rng.standard_normal((dx, dx)) + 1j * rng.standard_normal((dx, dx))
            observables.append((G + G.conj().T) / 2)
    res, coefs = [], []
    for O in observables:
        op = DenseOperator(tuple(X.sites), np.asarray(O, dtype=complex), 2, "O")
        c = np.trace(Ql.conj().T @ op.apply(Ql, local.sites)) / Ql.shape[1]
        C = Q.conj().T @ op.apply(Q, full.sites)
        res.append(float(np.abs(C - c * np.eye(r)).max(initial=0.0)))
        coefs.append(complex(c))
    return TQOReport(res, coefs, all(x < tol for x in res))


# --------------------------------------------------------------------------
# quantum-double terms on a fragment


def _local_configs(k: int, d: int) -> np.ndarray:
    return _digits(d**k, k, d).astype(np.int64)


def build_qdouble_terms(G, cc: CellComplex, sites: Iterable[int] | None = None) -> list[DenseOperator]:
    """Vertex averages ``A_v`` and flatness projectors ``B_p`` on a fragment.

    Only terms whose support lies inside ``sites`` are built. At a vertex
    ``v`` the gauge move by ``g`` sends an edge value ``x`` to ``g x`` when
    the edge leaves ``v`` and to ``x g^-1`` when it enters ``v``. ``B_p``
    keeps configurations whose ordered holonomy around the face is the
    identity.
    """
    frag = sorted(set(range(cc.n_sites) if sites is None else sites))
    d = G.order
    if d ** len(frag) > QDOUBLE_CAP:
        raise SizeCapError(f"|G|^{len(frag)} = {d ** len(frag)} exceeds the cap {QDOUBLE_CAP}")
    fs = set(frag)
    table, inv = G.table, G.inverse
    out: list[DenseOperator] = []
    for v, star in zip(cc.star_vertices, cc.stars):
        if not set(star) <= fs:
            continue
        k = len(star)
        conf = _local_configs(k, d)
        perms = []
        for g in range(d):
            new = conf.copy()
            for j, e in enumerate(star):
                t, h = cc.edge_ends[e]
                if t == v:
                    new[:, j] = table[g, conf[:, j]]
                if h == v:
                    new[:, j] = table[new[:, j], inv[g]]
            perms.append(new @ (d ** np.arange(k - 1, -1, -1)))
        out.append(DenseOperator.from_group_average(star, np.array(perms), d, f"A_{v}"))
    for f, loop in enumerate(cc.face_loops):
        edges = sorted({e for e, _ in loop})
        if not set(edges) <= fs:
            continue
        k = len(edges)
        pos = {e: i for i, e in enumerate(edges)}
        conf = _local_configs(k, d)
        hol = np.full(conf.shape[0], G.identity, dtype=np.int64)
        for e, s in loop:
            x = conf[:, pos[e]]
            hol = table[hol, x if s > 0 else inv[x]]
        out.append(DenseOperator.from_diag(edges, hol == G.identity, d, f"B_{f}"))
    return out


def qdouble_ground_projector(G, cc: CellComplex, sites: Iterable[int]) -> GroundProjector:
    sites = tuple(sorted(set(sites)))
    return ground_projector(build_qdouble_terms(G, cc, sites), sites, check=len(sites) <= 8)


def loop_operators(G, cc, A: Annulus) -> tuple[DenseOperator, DenseOperator]:
    """Trivial-flux and trivial-charge projectors for a capped-cylinder band.

    Flux: ordered holonomy around the first ring of the band is the identity.
    Charge: invariance under left multiplication of every vertical edge
    leaving that ring (the gauge move of the whole inner cap, which for an
    abelian group acts only on those edges).
    """
    if not G.is_abelian():
        raise OracleError("vacuum block is only built for abelian groups")
    if not hasattr(cc, "ring_edges") or not A.describe().startswith("rings"):
        raise OracleError("loop operators are defined for capped-cylinder bands")
    first = int(A.describe()[5:].split("-")[0])
    d = G.order
    ring = cc.ring_edges[first]
    k = len(ring)
    conf = _local_configs(k, d)
    hol = np.full(conf.shape[0], G.identity, dtype=np.int64)
    for j in range(k):
        hol = G.table[hol, conf[:, j]]
    flux = DenseOperator.from_diag(ring, hol == G.identity, d, "flux")
    cut = cc.verticals[first]
    m = len(cut)
    conf = _local_configs(m, d)
    w = d ** np.arange(m - 1, -1, -1)
    perms = [(G.table[g, conf]) @ w for g in range(d)]
    charge = DenseOperator.from_group_average(cut, np.array(perms), d, "charge")
    return flux, charge


@dataclass
class ThinAnnulusCount:
    total: int
    vacuum: int
    n_sites: int


def thin_annulus_ranks(G, cc, A: Annulus) -> ThinAnnulusCount:
    """Rank of the ground projector on ``A_+`` and of its vacuum block, by brute force."""
    stars_plaqs = list(cc.stars) + list(cc.plaquettes)
    aplus = fatten(cc, A.region, stars_plaqs)
    terms = build_qdouble_terms(G, cc, aplus.sites)
    flux, charge = loop_operators(G, cc, A)
    total = orbit_rank(terms, aplus.sites, G.order)
    vac = orbit_rank(terms + [flux, charge], aplus.sites, G.order)
    return ThinAnnulusCount(total, vac, len(aplus))


# --------------------------------------------------------------------------
# unitaries


def clifford_unitary(images: Sequence[PauliWord]) -> np.ndarray:
    """Unitary ``U`` with ``U X_j U^dag`` and ``U Z_j U^dag`` equal to
    ``images[2j]`` and ``images[2j+1]`` (global phase fixed arbitrarily)."""
    k = len(images) // 2
    if k > 7:
        raise SizeCapError("Clifford unitaries are only materialized up to 7 qubits")
    dim = 2**k
    gx = [images[2 * j].to_dense() for j in range(k)]
    gz = [images[2 * j + 1].to_dense() for j in range(k)]
    P = np.eye(dim, dtype=complex)
    for Zj in gz:
        P = P @ (np.eye(dim) + Zj) / 2
    w, v = np.linalg.eigh((P + P.conj().T) / 2)
    if np.sum(w > 0.5) != 1:
        raise OracleError("Z images do not fix a unique state")
    psi = v[:, np.argmax(w)]
    U = np.empty((dim, dim), dtype=complex)
    for b in range(dim):
        col = psi
        for j in range(k):
            if (b >> (k - 1 - j)) & 1:
                col = gx[j] @ col
        U[:, b] = col
    if np.abs(U.conj().T @ U - np.eye(dim)).max() > 1e-10:
        raise OracleError("constructed Clifford is not unitary")
    return U


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    from scipy.stats import unitary_group

    return unitary_group.rvs(dim, random_state=rng)


def conjugate_terms(terms: Sequence[DenseOperator], U: np.ndarray, sites: Sequence[int]) -> list[DenseOperator]:
    """``U h U^dag`` for each term; supports grow to include ``sites`` when they overlap."""
    sites = tuple(sites)
    out = []
    for t in terms:
        if set(t.support).isdisjoint(sites):
            out.append(t)
            continue
        sup = tuple(sorted(set(t.support) | set(sites)))
        dim = t.d ** len(sup)
        I = np.eye(dim, dtype=complex)
        Ufull = _apply_local(U, sites, t.d, I, sup)
        H = t.apply(I, sup)
        out.append(DenseOperator(sup, Ufull @ H @ Ufull.conj().T, t.d, t.label + "'", projector=True))
    return out


def apply_unitary(psi: np.ndarray, U: np.ndarray, sites: Sequence[int], all_sites: Sequence[int], d: int = 2) -> np.ndarray:
    return _apply_local(U, tuple(sites), d, psi.reshape(-1, 1), tuple(all_sites))[:, 0]


def dense_invariant_terms(terms: Sequence[DenseOperator], psi: np.ndarray, n: int, A: Sequence[int], seed: int = 0) -> DenseInvariant:
    """Dense route for an arbitrary commuting-projector term list on ``n`` sites."""
    A = tuple(sorted(A))
    aset = set(A)
    aplus = set()
    for t in terms:
        if aset & set(t.support):
            aplus |= set(t.support)
    aplus = tuple(sorted(aplus | aset))
    if len(aplus) > MAX_SITES:
        raise SizeCapError("A_+ exceeds the site cap")
    inside = [t for t in terms if set(t.support) <= set(aplus)]
    gp = GroundProjector(inside, aplus)
    rho = partial_trace(psi, A, tuple(range(n)))
    Q = gp.basis(seed + 1)
    tau = DensityMatrix(reduce_columns(Q, aplus, A) / Q.shape[1], A)
    return DenseInvariant(relative_entropy_bits(rho, tau), max_relative_entropy_bits(rho, tau), Q.shape[1], len(aplus), len(A), rho, tau)


@dataclass
class SpotCheck:
    before: DenseInvariant
    after: DenseInvariant
    gate_sites: tuple[int, ...]

    @property
    def difference(self) -> float:
        return abs(self.before.relative_entropy_bits - self.after.relative_entropy_bits)


def haar_spot_check(model: StabilizerModel, A: Annulus | Region, gate_sites: Sequence[int], seed: int = 0) -> SpotCheck:
    """Dense invariant of ``A`` before and after one Haar gate on ``gate_sites``."""
    region = A.region if isinstance(A, Annulus) else A
    n = model.n
    everything = tuple(range(n))
    terms = model_terms(model)
    psi = ground_state(model, seed=seed)
    U = haar_unitary(2 ** len(gate_sites), np.random.default_rng(seed))
    before = dense_invariant_terms(terms, psi, n, region.sites, seed)
    moved = conjugate_terms(terms, U, gate_sites)
    after = dense_invariant_terms(moved, apply_unitary(psi, U, gate_sites, everything), n, region.sites, seed)
    return SpotCheck(before, after, tuple(gate_sites))
