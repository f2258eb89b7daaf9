from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from trsdof.topology import fully_connected_topology, hierarchical_topology, make_cyclic_topology

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

A = Fraction(1, 5)
B = Fraction(4, 5)


@pytest.fixture
def hierarchical():
    return hierarchical_topology(A, B)


@pytest.fixture
def cyclic3():
    return make_cyclic_topology(3, A, B)


tenths = st.integers(0, 10).map(lambda n: Fraction(n, 10))


@st.composite
def full_topologies(draw, min_k=3, max_k=4, values=tenths):
    K = draw(st.integers(min_k, max_k))
    table = [[None if k == j else draw(values) for j in range(K)] for k in range(K)]
    return fully_connected_topology(table)


# acceptance criteria register their verdicts here; printed once at the end of the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
