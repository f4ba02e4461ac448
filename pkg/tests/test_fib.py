import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entinv import fib


def test_fib_values():
    assert [fib.fib(k) for k in range(8)] == [0, 1, 1, 2, 3, 5, 8, 13]
    with pytest.raises(ValueError):
        fib.fib(-1)


@pytest.mark.parametrize("n", range(1, 13))
@pytest.mark.parametrize("q", [fib.IOTA, fib.TAU])
def test_trees_match_counts(n, q):
    assert len(fib.fusion_trees(n, q)) == fib.fusion_dim(n, q)


@given(st.integers(1, 60), st.integers(1, 60))
def test_dimension_identity(a, b):
    assert fib.dimension_identity(a, b)


def test_ratios():
    phi2 = fib.PHI**2
    assert abs(float(fib.tau_sector_ratio(20, 20)) - phi2) < 1e-7
    assert abs(float(fib.total_ratio(20, 20)) - (1 + phi2)) < 1e-7
    assert abs(math.log2(fib.total_ratio(25, 25)) - math.log2((5 + math.sqrt(5)) / 2)) < 1e-8
    assert abs(fib.asymptotic_invariant_bits() - math.log2((5 + math.sqrt(5)) / 2)) < 1e-14


def test_small_blocks_rejected():
    with pytest.raises(ZeroDivisionError):
        fib.total_ratio(1, 5)
    with pytest.raises(ValueError):
        fib.fusion_dim(0)
    with pytest.raises(ValueError):
        fib.fusion_dim(3, "sigma")


def test_sweep_errors_shrink():
    rows = fib.ratio_sweep(30)
    errs = [r["abs_err"] for r in rows]
    assert rows[0]["n"] == 2 and rows[-1]["n"] == 30
    assert all(b <= a for a, b in zip(errs[1:], errs[2:]))
