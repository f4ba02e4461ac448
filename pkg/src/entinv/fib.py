"""Fibonacci anyon counting.

Indexing: ``F(0) = 0``, ``F(1) = F(2) = 1``. With this convention a chain
of ``n`` tau anyons has ``F(n-1)`` fusion channels to the vacuum and
``F(n)`` to tau.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

IOTA = "iota"
TAU = "tau"
PHI = (1 + math.sqrt(5)) / 2

# tau x tau = iota + tau; iota is the unit
_FUSE = {
    (IOTA, IOTA): (IOTA,),
    (IOTA, TAU): (TAU,),
    (TAU, IOTA): (TAU,),
    (TAU, TAU): (IOTA, TAU),
}


@lru_cache(maxsize=None)
def fib(k: int) -> int:
    if k < 0:
        raise ValueError("fib needs k >= 0")
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def _check_charge(charge: str) -> str:
    if charge not in (IOTA, TAU):
        raise ValueError(f"charge must be {IOTA!r} or {TAU!r}, got {charge!r}")
    return charge


def fusion_dim(n: int, charge: str = IOTA) -> int:
    """``dim Hom(tau^n, charge)``."""
    if n < 1:
        raise ValueError("need at least one anyon")
    _check_charge(charge)
    return fib(n - 1) if charge == IOTA else fib(n)


def fusion_trees(n: int, charge: str = IOTA) -> list[tuple[str, ...]]:
    """All left-associated fusion trees of ``n`` taus with the given total
    charge, listed by their intermediate labels."""
    if n < 1:
        raise ValueError("need at least one anyon")
    _check_charge(charge)
    out = []
    for mids in itertools.product((IOTA, TAU), repeat=n - 1):
        acc = TAU
        ok = True
        for x in mids:
            if x not in _FUSE[(acc, TAU)]:
                ok = False
                break
            acc = x
        if ok and acc == charge:
            out.append(mids)
    return out


def dimension_identity(nA: int, nB: int) -> bool:
    """``F(nA-1)F(nB-1) + F(nA)F(nB) == F(nA+nB-1)``."""
    if nA < 1 or nB < 1:
        raise ValueError("block sizes must be >= 1")
    return fib(nA - 1) * fib(nB - 1) + fib(nA) * fib(nB) == fib(nA + nB - 1)


def _need2(nA: int, nB: int) -> None:
    if nA < 2 or nB < 2:
        raise ZeroDivisionError("vacuum channel is empty for a block of one anyon")


def tau_sector_ratio(nA: int, nB: int) -> Fraction:
    """Weight of the tau channel between the blocks relative to the vacuum channel."""
    _need2(nA, nB)
    return Fraction(fib(nA) * fib(nB), fib(nA - 1) * fib(nB - 1))


def total_ratio(nA: int, nB: int) -> Fraction:
    """Total fusion dimension relative to the vacuum channel."""
    _need2(nA, nB)
    return Fraction(fib(nA + nB - 1), fib(nA - 1) * fib(nB - 1))


def asymptotic_invariant_bits() -> float:
    """``log2(1 + phi^2)``: the limit of ``log2 total_ratio`` for long chains."""
    return math.log2(1 + PHI * PHI)


def ratio_sweep(n_max: int, n_min: int = 2) -> list[dict]:
    """Rows ``n, ratio, |ratio - phi^2|`` for symmetric blocks."""
    rows = []
    for n in range(n_min, n_max + 1):
        r = tau_sector_ratio(n, n)
        rows.append({"n": n, "ratio": float(r), "abs_err": abs(float(r) - PHI * PHI)})
    return rows
