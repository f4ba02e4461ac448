import pytest
from hypothesis import settings

from entinv.lattice import Lattice, capped_cylinder, ring_annulus
from entinv.pauli import toric_model

settings.register_profile("entinv", deadline=None, max_examples=60)
settings.load_profile("entinv")


@pytest.fixture(scope="session")
def sphere():
    cc = capped_cylinder((2, 2, 2, 2))
    return cc, toric_model(cc), ring_annulus(cc, 1, 2, closed=False)


@pytest.fixture(scope="session")
def torus8():
    lat = Lattice(8, 8)
    return lat, toric_model(lat)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
