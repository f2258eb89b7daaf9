from fractions import Fraction
from itertools import combinations
from math import comb, factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trsdof.errors import NotFullyConnected
from trsdof.lp import enumerate_vertices
from trsdof.regions import (
    cyclic_sequence_count,
    cyclic_sequences,
    max_weighted_sum,
    potential_feasibility,
    rs_region,
    zfbf_region,
)
from trsdof.topology import hierarchical_topology, make_cyclic_topology

from .conftest import A, B, full_topologies, tenths


def _vertex_max(region, weights):
    verts = enumerate_vertices([i.coeffs for i in region.inequalities], [i.rhs for i in region.inequalities])
    return max(sum(Fraction(w) * x for w, x in zip(weights, v)) for v in verts)


def _sum_rows(region):
    """``{(frozenset of users, has d_c): rhs}`` for every non-box row."""
    out = {}
    for ineq in region.inequalities:
        users = frozenset(k + 1 for k, c in zip(region.users, ineq.coeffs) if c)
        common = region.has_common and ineq.coeffs[-1] != 0
        out[(users, common)] = ineq.rhs
    return out


def test_cyclic_sequences_three_users():
    assert cyclic_sequences([0, 1, 2]) == [(0, 1), (0, 2), (1, 2), (0, 1, 2), (0, 2, 1)]
    assert cyclic_sequences([0, 1]) == [(0, 1)]
    assert len(cyclic_sequences(range(4))) == 20


@pytest.mark.parametrize("n", range(1, 8))
def test_cyclic_sequence_count_formula(n):
    expected = sum(comb(n, m) * factorial(m - 1) for m in range(2, n + 1))
    assert cyclic_sequence_count(n) == expected == len(cyclic_sequences(range(n)))


def test_hierarchical_rs_rows_for_all_users(hierarchical):
    rows = _sum_rows(rs_region(hierarchical, [0, 1, 2]))
    assert rows[(frozenset({1, 2, 3}), False)] == 2 * B + A
    assert rows[(frozenset({1, 2, 3}), True)] == 1 + B + A
    assert rows[(frozenset({2, 3}), False)] == 2 * A
    assert rows[(frozenset({1, 2}), False)] == 2 * B


def test_hierarchical_rs_rows_for_users_two_three(hierarchical):
    rows = _sum_rows(rs_region(hierarchical, [1, 2]))
    assert rows[(frozenset({2, 3}), False)] == 2 * A
    assert rows[(frozenset({2, 3}), True)] == 1 + A


def test_single_user_region(hierarchical):
    rs = rs_region(hierarchical, [1])
    assert {i.kind for i in rs.inequalities} <= {"box", "private+common"}
    assert rs.dump() == "d_p_2 <= 1/1\nd_c <= 1/1\nd_p_2 + d_c <= 1/1\n"
    assert zfbf_region(hierarchical, [1]).dump() == "d_p_2 <= 1/1\n"


def test_zfbf_drops_common_rows(hierarchical):
    rs, zf = rs_region(hierarchical, [0, 1, 2]), zfbf_region(hierarchical, [0, 1, 2])
    assert not zf.has_common
    no_common = {key for key in _sum_rows(rs) if not key[1]}
    assert set(_sum_rows(zf)) == no_common


def test_region_maxima_match_vertex_enumeration(hierarchical, cyclic3):
    for t in (hierarchical, cyclic3):
        for users in ([0, 1, 2], [1, 2], [0, 1]):
            for region in (rs_region(t, users), zfbf_region(t, users)):
                ones = [1] * region.dimension
                assert max_weighted_sum(region, ones) == _vertex_max(region, ones)


def test_cyclic3_zfbf_best_subset_is_a_plus_b(cyclic3):
    best = max(
        max_weighted_sum(zfbf_region(cyclic3, U), [1] * len(U))
        for n in (1, 2, 3)
        for U in combinations(range(3), n)
    )
    assert best == A + B


def test_hierarchical_zfbf_at_other_point():
    t = hierarchical_topology(Fraction(2, 5), Fraction(1, 2))
    assert max_weighted_sum(zfbf_region(t, [0, 1, 2]), [1, 1, 1]) == Fraction(7, 5)


def test_zero_weights(hierarchical):
    assert max_weighted_sum(rs_region(hierarchical, [0, 1, 2]), [0, 0, 0, 0]) == 0


def test_partial_topology_rejected():
    with pytest.raises(NotFullyConnected):
        rs_region(make_cyclic_topology(5, A, B), [0, 1])


def test_potential_recovers_even_policy(hierarchical):
    res = potential_feasibility(hierarchical, [0, 1, 2], [0, 1, 2], {0: A, 1: A, 2: A}, 1 - A)
    assert res.feasible and res.power == (A, A, A)


def test_potential_negative_circuit(hierarchical):
    res = potential_feasibility(hierarchical, [0, 1, 2], [0, 1], {0: 1, 1: 1})
    assert not res.feasible
    assert set(res.circuit) == {0, 1}
    assert res.circuit_length == 2 * B - 2
    region = rs_region(hierarchical, [0, 1])
    assert not res.violated.holds(region.point({0: 1, 1: 1}))


def test_potential_zero_tuple(hierarchical):
    assert potential_feasibility(hierarchical, [0, 1, 2], [0, 1, 2], {}).feasible


def test_potential_box_violation(hierarchical):
    res = potential_feasibility(hierarchical, [0, 1, 2], [0], {0: Fraction(6, 5)})
    assert not res.feasible and res.violated.kind == "box"


def power_conditions_hold(t, U, private, common, r):
    if any(not 0 <= x <= 1 for x in r):
        return False
    for k in U:
        d = private.get(k, 0)
        if d > r[k] or common > 1 - r[k]:
            return False
        if any(d > r[k] - r[j] + t.quality(k, j) for j in U if j != k):
            return False
    return True


@given(full_topologies(), st.data())
def test_potential_matches_membership(t, data):
    U = data.draw(st.lists(st.integers(0, t.K - 1), min_size=1, unique=True).map(sorted))
    private = {k: data.draw(tenths) for k in U}
    common = data.draw(tenths)
    region = rs_region(t, U)
    res = potential_feasibility(t, range(t.K), U, private, common)
    assert res.feasible == region.contains(region.point(private, common))
    if res.feasible:
        assert power_conditions_hold(t, U, private, common, res.power)
    else:
        assert not res.violated.holds(region.point(private, common)) or res.violated.kind == "box"


@given(full_topologies(max_k=4), st.data())
def test_zfbf_vertices_inside_rs(t, data):
    U = data.draw(st.lists(st.integers(0, t.K - 1), min_size=1, unique=True).map(sorted))
    zf, rs = zfbf_region(t, U), rs_region(t, U)
    verts = enumerate_vertices([i.coeffs for i in zf.inequalities], [i.rhs for i in zf.inequalities])
    assert all(rs.contains(v + (Fraction(0),)) for v in verts)


@given(full_topologies())
def test_pruning_keeps_the_polytope(t):
    U = list(range(t.K))
    full, pruned = rs_region(t, U), rs_region(t, U, prune=True)
    ones = [1] * full.dimension
    assert max_weighted_sum(full, ones) == max_weighted_sum(pruned, ones)
