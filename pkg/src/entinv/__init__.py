"""Entropic invariant of 2D commuting projector models."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.0.0"

from . import circuits, fib, gf2, lattice, oracle, pauli, qdouble, sectors  # noqa: E402

__all__ = ["__version__", "circuits", "fib", "gf2", "lattice", "oracle", "pauli", "qdouble", "sectors"]
