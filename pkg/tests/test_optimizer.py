from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trsdof.errors import ClosedFormMismatch, NotFullyConnected, SizeBound
from trsdof.lp import enumerate_vertices
from trsdof.packing import realistic_sum_dof
from trsdof.optimizer import (
    CSV_COLUMNS,
    RS,
    TRS_MAX,
    TRS_ORTH,
    ZFBF,
    SweepConfig,
    compare_schemes,
    cyclic_zfbf_closed_form,
    sum_dof_rs,
    sum_dof_trs,
    sum_dof_zfbf,
    trs_advantage_condition,
)
from trsdof.regions import zfbf_region
from trsdof.topology import (
    effective_zfbf_topology,
    fully_connected_topology,
    hierarchical_topology,
    make_cyclic_topology,
)
from trsdof.trs import ORTHOGONAL, build_trs_plan, plan_sum_dof, private_dof

from .conftest import A, B, full_topologies, tenths

GRID = [Fraction(n, 10) for n in range(11)]


def zf_by_vertices(t):
    """Zero-forcing optimum from vertex enumeration of every active set."""
    te = effective_zfbf_topology(t)
    best = Fraction(0)
    for n in range(1, t.K + 1):
        for U in combinations(range(t.K), n):
            region = zfbf_region(te, U)
            verts = enumerate_vertices([i.coeffs for i in region.inequalities], [i.rhs for i in region.inequalities])
            best = max(best, max(sum(v) for v in verts))
    return best


def test_zfbf_examples(hierarchical, cyclic3):
    assert sum_dof_zfbf(hierarchical).value == Fraction(8, 5)
    assert sum_dof_zfbf(cyclic3).value == 1
    assert sum_dof_zfbf(make_cyclic_topology(6, A, B)).value == 3


def test_rs_examples(hierarchical, cyclic3):
    assert sum_dof_rs(hierarchical).value == Fraction(9, 5)
    assert sum_dof_rs(cyclic3).value == Fraction(7, 5)
    no_csit = fully_connected_topology([[None if k == j else 0 for j in range(3)] for k in range(3)])
    assert sum_dof_rs(no_csit).value == 1
    with pytest.raises(NotFullyConnected):
        sum_dof_rs(make_cyclic_topology(5, A, B))


def test_trs_examples(hierarchical, cyclic3):
    assert sum_dof_trs(hierarchical).value == 1 + B + A
    assert sum_dof_trs(cyclic3).value == 1 + (B + 3 * A) / 2
    assert sum_dof_trs(cyclic3, mode=ORTHOGONAL).value == 1 + 2 * A


def test_witnesses_reproduce_values(hierarchical, cyclic3):
    for t in (hierarchical, cyclic3):
        zf = sum_dof_zfbf(t)
        assert sum(private_dof(t, zf.S, zf.r)) >= zf.value
        trs = sum_dof_trs(t)
        assert plan_sum_dof(build_trs_plan(t, trs.S, trs.r)).total == trs.value


def test_grid_search_matches_exact(hierarchical, cyclic3):
    grid = SweepConfig(search="grid")
    for t in (hierarchical, cyclic3):
        for mode in ("maximal", "orthogonal"):
            assert sum_dof_trs(t, grid, mode).value == sum_dof_trs(t, mode=mode).value


def test_size_bound():
    with pytest.raises(SizeBound):
        sum_dof_zfbf(make_cyclic_topology(9, A, B), SweepConfig(max_users=8))


def test_cyclic_zfbf_closed_form_examples():
    assert cyclic_zfbf_closed_form(6, A, B) == 3
    assert cyclic_zfbf_closed_form(7, Fraction(2, 5), Fraction(9, 10)) == Fraction(33, 10)
    assert cyclic_zfbf_closed_form(5, Fraction(1, 10), Fraction(1, 2)) == 2


def test_advantage_condition_examples():
    assert trs_advantage_condition(6, A, B)
    assert not trs_advantage_condition(6, Fraction(1, 10), Fraction(7, 10))
    assert not trs_advantage_condition(4, 0, 1)
    assert not trs_advantage_condition(7, 0, 0)


def test_compare_hierarchical_cyclic3(hierarchical, cyclic3):
    r1 = compare_schemes(hierarchical)
    assert [r1.value(s) for s in (ZFBF, RS, TRS_MAX)] == [Fraction(8, 5), Fraction(9, 5), 2]
    r2 = compare_schemes(cyclic3)
    assert [r2.value(s) for s in (ZFBF, RS, TRS_ORTH, TRS_MAX)] == [1, Fraction(7, 5), Fraction(7, 5), Fraction(17, 10)]
    assert all(chk.ok for chk in r2.checks)
    assert r2.flags["advantage_condition"]
    assert r2.to_csv().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_perfect_csit_gives_full_dof():
    t = fully_connected_topology([[None if k == j else 1 for j in range(4)] for k in range(4)])
    report = compare_schemes(t)
    assert {report.value(s) for s in (ZFBF, RS, TRS_ORTH, TRS_MAX)} == {4}


def test_partial_topology_skips_rs():
    report = compare_schemes(make_cyclic_topology(6, A, B))
    assert report.value(RS) is None and RS in report.flags["not_applicable"]
    assert report.value(TRS_MAX) == Fraction(17, 5)


def test_hierarchical_zfbf_closed_form_needs_single_user_floor():
    # the closed form misses the value 1 of serving a single user when 2b < 1
    mismatches = []
    for a, b in product(GRID, repeat=2):
        if a > b:
            continue
        t = hierarchical_topology(a, b)
        closed = max(2 * b, min(1 + 2 * a, 2 * b + a))
        value = sum_dof_zfbf(t).value
        assert value == max(Fraction(1), closed)
        if value != closed:
            mismatches.append((a, b))
    assert mismatches and all(2 * b < 1 for _, b in mismatches)


def test_hierarchical_rs_closed_form_on_grid():
    for a, b in product(GRID, repeat=2):
        if a <= b:
            assert sum_dof_rs(hierarchical_topology(a, b)).value == max(1 + 2 * a, 1 + b)


@pytest.mark.parametrize(
    "K, a, b",
    [(3, Fraction(2, 5), Fraction(2, 5)), (5, Fraction(2, 5), Fraction(7, 10)), (7, Fraction(2, 5), Fraction(7, 10))],
)
def test_odd_cycle_zfbf_closed_form_disagrees_with_lp(K, a, b):
    t = make_cyclic_topology(K, a, b)
    lp_value = sum_dof_zfbf(t).value
    if K <= 5:
        assert lp_value == zf_by_vertices(t)
    assert lp_value == cyclic_zfbf_closed_form(K, a, b) + Fraction(1, 5 if K == 3 else 10)
    with pytest.raises(ClosedFormMismatch):
        compare_schemes(t)


@pytest.mark.parametrize("K", [4, 6])
def test_even_cycle_zfbf_closed_form_on_grid(K):
    for a, b in product(GRID[::2], repeat=2):
        if a <= b:
            assert sum_dof_zfbf(make_cyclic_topology(K, a, b)).value == cyclic_zfbf_closed_form(K, a, b)


def test_equal_quality_per_user_trs_equals_rs():
    values = [Fraction(n, 5) for n in range(6)]
    for alpha in product(values, repeat=3):
        t = fully_connected_topology([[None if k == j else alpha[k] for j in range(3)] for k in range(3)])
        assert sum_dof_trs(t).value == sum_dof_rs(t).value


@settings(max_examples=25)
@given(full_topologies())
def test_scheme_ordering(t):
    zf, rs = sum_dof_zfbf(t).value, sum_dof_rs(t).value
    orth, full = sum_dof_trs(t, mode=ORTHOGONAL).value, sum_dof_trs(t).value
    assert full >= orth and full >= rs >= zf
    assert zf == zf_by_vertices(t)


@settings(max_examples=25)
@given(full_topologies(), st.data())
def test_exact_dominates_grid_and_random_policies(t, data):
    exact = sum_dof_trs(t).value
    assert sum_dof_trs(t, SweepConfig(search="grid")).value <= exact
    S = data.draw(st.lists(st.integers(0, t.K - 1), min_size=1, unique=True).map(sorted))
    r = [data.draw(tenths) if k in S else Fraction(0) for k in range(t.K)]
    assert plan_sum_dof(build_trs_plan(t, S, r)).total <= exact


@pytest.mark.parametrize("K", [6, 7])
def test_advantage_condition_disagrees_only_with_perfect_csit(K):
    # with a = b = 1 both schemes reach K, yet b + 3a clears the threshold
    disagreements = [
        (a, b)
        for a, b in product(GRID, repeat=2)
        if a <= b
        and (realistic_sum_dof(make_cyclic_topology(K, a, b)) > cyclic_zfbf_closed_form(K, a, b))
        != trs_advantage_condition(K, a, b)
    ]
    assert disagreements == [(1, 1)]
    assert realistic_sum_dof(make_cyclic_topology(K, 1, 1)) == cyclic_zfbf_closed_form(K, 1, 1) == K
