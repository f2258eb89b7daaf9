from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trsdof.errors import (
    ExponentOutOfRange,
    InvalidActiveSet,
    InvalidOrder,
    MissingDiagonal,
    MissingQuality,
    QualityOnAbsentLink,
    QualityOutOfRange,
    TopologyFormatError,
)
from trsdof.topology import (
    as_rational,
    effective_zfbf_topology,
    format_decimal,
    format_rational,
    format_topology,
    fully_connected_topology,
    make_cyclic_topology,
    make_realistic_topology,
    parse_topology,
    parse_user_list,
    power_policy,
    rotate_topology,
    validate_topology,
)

from .conftest import A, B, full_topologies


def test_hierarchical_accepted(hierarchical):
    assert hierarchical.K == 3
    assert hierarchical.is_fully_connected()
    assert hierarchical.quality(0, 1) == B and hierarchical.quality(1, 2) == A


def test_quality_above_one_rejected():
    with pytest.raises(QualityOutOfRange) as exc:
        validate_topology(2, [[1, 1], [1, 1]], {(0, 1): Fraction(3, 2), (1, 0): Fraction(0)})
    assert exc.value.diagnostic().startswith("QualityOutOfRange at (1,2)")


def test_quality_on_absent_link_rejected():
    conn = [[1, 1, 0], [1, 1, 1], [1, 1, 1]]
    quals = {(k, j): A for k in range(3) for j in range(3) if k != j}
    with pytest.raises(QualityOnAbsentLink):
        validate_topology(3, conn, quals)


def test_missing_quality_and_diagonal():
    with pytest.raises(MissingQuality):
        validate_topology(2, [[1, 1], [1, 1]], {(0, 1): A})
    with pytest.raises(MissingDiagonal):
        validate_topology(2, [[0, 1], [1, 1]], {(0, 1): A, (1, 0): A})


def test_cyclic_k3_is_cyclic3_pattern(cyclic3):
    assert cyclic3.is_fully_connected()
    for k in range(3):
        assert cyclic3.quality(k, (k + 1) % 3) == A
        assert cyclic3.quality(k, (k - 1) % 3) == B


def test_cyclic_no_csit():
    t = make_cyclic_topology(5, 0, 0)
    assert all(t.quality(k, j) == 0 for k, j in t.interference_links())


def test_cyclic_k6_link_counts():
    t = make_cyclic_topology(6, A, B)
    present = len(t.interference_links())
    absent = sum(1 for k in range(6) for j in range(6) if not t.connectivity[k][j])
    assert (present, absent) == (12, 18)


def test_cyclic_order_checked():
    with pytest.raises(InvalidOrder):
        make_cyclic_topology(4, B, A)


def test_effective_topology_identity_on_full(cyclic3):
    assert effective_zfbf_topology(cyclic3) == cyclic3


def test_effective_topology_fills_absent_links():
    t = make_cyclic_topology(6, A, B)
    e = effective_zfbf_topology(t)
    assert e.is_fully_connected()
    for k in range(6):
        for j in range(6):
            if (k - j) % 6 not in (0, 1, 5):
                assert e.quality(k, j) == 1
    t5 = make_realistic_topology(5, A, B, [0, 1, 0, 1, 1])
    e5 = effective_zfbf_topology(t5)
    filled = sum(1 for k, j in e5.interference_links() if not t5.connectivity[k][j])
    assert filled == 10


def test_rationals_exact():
    assert as_rational("0.2") == Fraction(1, 5)
    assert as_rational(0.1) == Fraction(1, 10)
    assert format_rational(Fraction(2)) == "2/1"
    assert format_decimal(Fraction(1, 3)) == "0.333333"
    assert format_decimal(Fraction(17, 10)) == "1.700000"
    with pytest.raises(ValueError):
        as_rational("x")


def test_power_policy_and_active_sets():
    assert power_policy(["1/5", 0, 1]) == (A, 0, 1)
    with pytest.raises(ExponentOutOfRange):
        power_policy([Fraction(6, 5)])
    assert parse_user_list("2,3", 3) == (1, 2)
    with pytest.raises(InvalidActiveSet):
        parse_user_list("4", 3)


def test_text_roundtrip_and_format_errors(hierarchical):
    assert parse_topology(format_topology(hierarchical)) == hierarchical
    with pytest.raises(TopologyFormatError):
        parse_topology("{")
    with pytest.raises(TopologyFormatError):
        parse_topology('{"K": 2, "connectivity": ["11"]}')


@given(full_topologies(max_k=5))
def test_effective_topology_always_valid(t):
    e = effective_zfbf_topology(t)
    validate_topology(e.K, e.connectivity, {(k, j): e.quality(k, j) for k, j in e.interference_links()})


@given(st.integers(3, 8), st.data())
def test_cyclic_rotation_invariant(K, data):
    a = data.draw(st.integers(0, 10)) / Fraction(10)
    b = data.draw(st.integers(int(a * 10), 10)) / Fraction(10)
    t = make_cyclic_topology(K, a, b)
    shift = data.draw(st.integers(0, K - 1))
    assert rotate_topology(t, shift) == t


@given(st.integers(3, 8), st.data())
def test_realistic_roundtrip(K, data):
    bits = data.draw(st.lists(st.integers(0, 1), min_size=K, max_size=K))
    t = make_realistic_topology(K, Fraction(1, 10), Fraction(7, 10), bits)
    assert parse_topology(format_topology(t)) == t


@given(st.fractions(), st.fractions())
def test_rational_arithmetic_closed(x, y):
    for value in (x + y, x - y, x * y) + ((x / y,) if y else ()):
        assert isinstance(value, Fraction)
        assert as_rational(format_rational(value)) == value
