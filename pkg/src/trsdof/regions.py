"""Achievable DoF polytopes for zero-forcing and rate-splitting, plus the
shortest-path feasibility test that recovers a power policy.

Regions are expressed over the private DoF ``d_p_k`` of the users in an
active set ``U`` and, for rate-splitting, one aggregate common DoF ``d_c``.
Only the sum of the per-transmitter common DoF is ever constrained, so a
single aggregate variable loses nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

from .errors import NotFullyConnected
from .lp import LinearProgram, LpSolution, solve_max
from .topology import ONE, ZERO, CsitTopology, format_rational

BOX = "box"
PRIVATE_COMMON = "private+common"
CYCLE = "cycle"
PATH = "path"


def cyclic_sequences(users: Iterable[int]) -> list[tuple[int, ...]]:
    """Every cyclically ordered subset of ``users`` with at least two members.

    Each sequence is reported once, rotated so its smallest member comes
    first; ``(1, 2, 3)`` and ``(1, 3, 2)`` are different sequences.  Sorted
    by length, then lexicographically.
    """
    U = sorted(set(users))
    out = []
    for m in range(2, len(U) + 1):
        for subset in combinations(U, m):
            first, rest = subset[0], subset[1:]
            out.extend((first,) + perm for perm in permutations(rest))
    out.sort(key=lambda s: (len(s), s))
    return out


def cyclic_sequence_count(n: int) -> int:
    """Closed-form number of cyclic sequences over ``n`` users."""
    return sum(comb(n, m) * factorial(m - 1) for m in range(2, n + 1))


def cycle_bound(t: CsitTopology, seq: Sequence[int]) -> Fraction:
    """Sum of qualities ``a[i_{l-1}][i_l]`` around the closed sequence."""
    return sum((t.quality(seq[l - 1], seq[l]) for l in range(len(seq))), ZERO)


def path_bound(t: CsitTopology, seq: Sequence[int]) -> Fraction:
    """``1`` plus the qualities along the open sequence."""
    return ONE + sum((t.quality(seq[l - 1], seq[l]) for l in range(1, len(seq))), ZERO)


@dataclass(frozen=True)
class Inequality:
    """``coeffs . x <= rhs``; ``kind`` and ``sequence`` record where it came from."""

    coeffs: tuple[Fraction, ...]
    rhs: Fraction
    kind: str
    sequence: tuple[int, ...] = ()

    def holds(self, x: Sequence[Fraction]) -> bool:
        return sum(c * v for c, v in zip(self.coeffs, x)) <= self.rhs


@dataclass(frozen=True)
class LinearRegion:
    """A polytope over nonnegative DoF variables.

    Attributes
    ----------
    variables : tuple of str
        ``d_p_k`` (1-based ``k``) for each user of ``users``, then ``d_c``
        when the region carries a common part.
    users : tuple of int
        0-based active users, ascending.
    has_common : bool
    inequalities : tuple of Inequality
        Upper bounds; nonnegativity of every variable is implicit.
    """

    variables: tuple[str, ...]
    users: tuple[int, ...]
    has_common: bool
    inequalities: tuple[Inequality, ...]

    @property
    def dimension(self) -> int:
        return len(self.variables)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(v >= 0 for v in x) and all(ineq.holds(x) for ineq in self.inequalities)

    def violated(self, x: Sequence[Fraction]) -> list[Inequality]:
        return [ineq for ineq in self.inequalities if not ineq.holds(x)]

    def point(self, private: Mapping[int, Fraction], common: Fraction = ZERO) -> tuple[Fraction, ...]:
        """Vector in variable order from a per-user mapping."""
        x = [Fraction(private.get(k, 0)) for k in self.users]
        if self.has_common:
            x.append(Fraction(common))
        return tuple(x)

    def to_lp(self, weights: Sequence[object]) -> LinearProgram:
        if len(weights) != self.dimension:
            raise ValueError(f"expected {self.dimension} weights, got {len(weights)}")
        return LinearProgram(
            tuple(Fraction(w) for w in weights),
            tuple(ineq.coeffs for ineq in self.inequalities),
            tuple(ineq.rhs for ineq in self.inequalities),
        )

    def dump(self) -> str:
        """One inequality per line, e.g. ``d_p_2 + d_p_3 + d_c <= 6/5``."""
        lines = []
        for ineq in self.inequalities:
            terms = []
            for name, c in zip(self.variables, ineq.coeffs):
                if c == 0:
                    continue
                mag = "" if abs(c) == 1 else format_rational(abs(c)) + "*"
                sign = "-" if c < 0 else "+"
                terms.append((sign, mag + name))
            text = ""
            for i, (sign, term) in enumerate(terms):
                if i == 0:
                    text = ("-" if sign == "-" else "") + term
                else:
                    text += f" {sign} {term}"
            text = text or "0"
            lines.append(f"{text} <= {format_rational(ineq.rhs)}")
        return "\n".join(lines) + ("\n" if lines else "")


def _require_fully_connected(t: CsitTopology) -> None:
    if not t.is_fully_connected():
        missing = next((k, j) for k in range(t.K) for j in range(t.K) if not t.connectivity[k][j])
        raise NotFullyConnected(
            "region formulas need every link present; apply effective_zfbf_topology first",
            (missing[0] + 1, missing[1] + 1),
        )


def _box_redundant(row_size: int, rhs: Fraction) -> bool:
    # a row over m unit-bounded variables with rhs >= m is implied by the box
    return rhs >= row_size


def rs_region(t: CsitTopology, users: Iterable[int], prune: bool = False) -> LinearRegion:
    """Rate-splitting DoF region for private users ``users`` and a common part.

    Rows, deduplicated by coefficient vector with the tightest bound kept:

    * ``0 <= d <= 1`` for every variable, ``d_p_k + d_c <= 1``;
    * ``sum d_p over seq <= sum of qualities around seq`` for each cyclic
      sequence;
    * ``d_c + sum d_p over seq <= 1 + qualities along seq`` for every linear
      ordering of every subset of ``users``.

    Open orderings are enumerated in every rotation, since each rotation
    corresponds to a different circuit through the auxiliary vertex of the
    potential graph and may give a different bound.

    ``prune`` drops cycle and path rows already implied by the box.
    """
    _require_fully_connected(t)
    return _build_region(t, users, with_common=True, prune=prune)


def zfbf_region(t: CsitTopology, users: Iterable[int], prune: bool = False) -> LinearRegion:
    """Zero-forcing region: the rate-splitting rows that do not involve ``d_c``."""
    _require_fully_connected(t)
    return _build_region(t, users, with_common=False, prune=prune)


def _build_region(t, users, with_common, prune):
    U = tuple(sorted(set(users)))
    if any(not 0 <= k < t.K for k in U):
        raise ValueError(f"users outside 1..{t.K}")
    pos = {k: i for i, k in enumerate(U)}
    n = len(U) + (1 if with_common else 0)
    common = len(U) if with_common else None
    rows: dict[tuple[Fraction, ...], Inequality] = {}

    def add(members, rhs, kind, seq=()):
        coeffs = [ZERO] * n
        for k in members:
            coeffs[pos[k]] = ONE
        if kind in (PATH, PRIVATE_COMMON):
            coeffs[common] = ONE
        key = tuple(coeffs)
        old = rows.get(key)
        if old is None or rhs < old.rhs:
            rows[key] = Inequality(key, rhs, kind, tuple(seq))

    for k in U:
        add([k], ONE, BOX)
    if with_common:
        coeffs = [ZERO] * n
        coeffs[common] = ONE
        rows[tuple(coeffs)] = Inequality(tuple(coeffs), ONE, BOX)
        for k in U:
            add([k], ONE, PRIVATE_COMMON, (k,))
    for seq in cyclic_sequences(U):
        rhs = cycle_bound(t, seq)
        if prune and _box_redundant(len(seq), rhs):
            continue
        add(seq, rhs, CYCLE, seq)
    if with_common:
        for m in range(2, len(U) + 1):
            for subset in combinations(U, m):
                for seq in permutations(subset):
                    rhs = path_bound(t, seq)
                    if prune and _box_redundant(m, rhs):
                        continue
                    add(seq, rhs, PATH, seq)
    names = tuple(f"d_p_{k + 1}" for k in U) + (("d_c",) if with_common else ())
    return LinearRegion(names, U, with_common, tuple(rows.values()))


def region_optimum(region: LinearRegion, weights: Sequence[object]) -> LpSolution:
    return solve_max(region.to_lp(weights))


def max_weighted_sum(region: LinearRegion, weights: Sequence[object]) -> Fraction:
    """Exact maximum of ``weights . d`` over the region."""
    if region.dimension == 0:
        return ZERO
    sol = region_optimum(region, weights)
    if not sol.optimal:
        raise RuntimeError(f"region LP ended with status {sol.status}")
    return sol.value


# --- potential graph -------------------------------------------------------

AUX = None  # label of the auxiliary vertex in circuits


@dataclass(frozen=True)
class PotentialGraph:
    """Complete directed graph on the auxiliary vertex and the active users.

    ``vertices[0]`` is the auxiliary vertex (label ``None``); the remaining
    vertices are 0-based user indices.  ``lengths[(u, v)]`` is the arc length
    between vertex positions ``u`` and ``v``.
    """

    vertices: tuple[int | None, ...]
    lengths: Mapping[tuple[int, int], Fraction]


def potential_graph(
    t: CsitTopology, users: Sequence[int], private: Mapping[int, Fraction], common: Fraction
) -> PotentialGraph:
    """Arc lengths: user j to user k is ``a[k][j] - d_k``, user k to the
    auxiliary vertex is ``1 - d_c``, auxiliary vertex to user k is ``-d_k``."""
    U = tuple(users)
    verts = (AUX,) + U
    lengths = {}
    for pk, k in enumerate(U, start=1):
        dk = Fraction(private.get(k, 0))
        lengths[(0, pk)] = -dk
        lengths[(pk, 0)] = ONE - Fraction(common)
        for pj, j in enumerate(U, start=1):
            if j != k:
                lengths[(pj, pk)] = t.quality(k, j) - dk
    return PotentialGraph(verts, lengths)


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the potential test.

    ``power`` is a full length-K policy (silent users at 0) when feasible.
    Otherwise ``circuit`` lists the vertices of a negative circuit in
    traversal order (``None`` for the auxiliary vertex), ``circuit_length``
    its total length and ``violated`` the region row it certifies as broken.
    """

    feasible: bool
    power: tuple[Fraction, ...] | None = None
    circuit: tuple[int | None, ...] | None = None
    circuit_length: Fraction | None = None
    violated: Inequality | None = None


def _bellman_ford(graph: PotentialGraph):
    n = len(graph.vertices)
    dist: list[Fraction | None] = [None] * n
    pred = [None] * n
    dist[0] = ZERO
    arcs = sorted(graph.lengths.items())
    for _ in range(n - 1):
        changed = False
        for (u, v), w in arcs:
            if dist[u] is not None and (dist[v] is None or dist[u] + w < dist[v]):
                dist[v] = dist[u] + w
                pred[v] = u
                changed = True
        if not changed:
            break
    for (u, v), w in arcs:
        if dist[u] is not None and (dist[v] is None or dist[u] + w < dist[v]):
            pred[v] = u
            x = v
            for _ in range(n):
                x = pred[x]
            cycle = [x]
            y = pred[x]
            while y != x:
                cycle.append(y)
                y = pred[y]
            cycle.reverse()
            return dist, cycle
    return dist, None


def _circuit_inequality(t: CsitTopology, U: Sequence[int], circuit: Sequence[int | None]) -> Inequality:
    """Row over ``(d_p for U..., d_c)`` that a negative circuit certifies as violated."""
    if AUX in circuit:
        i = circuit.index(AUX)
        walk = list(circuit[i + 1 :]) + list(circuit[:i])
        seq = tuple(reversed(walk))
        kind = PRIVATE_COMMON if len(seq) == 1 else PATH
        rhs = path_bound(t, seq)
    else:
        seq = tuple(reversed(circuit))
        j = seq.index(min(seq))
        seq = seq[j:] + seq[:j]
        kind = CYCLE
        rhs = cycle_bound(t, seq)
    coeffs = [ONE if k in seq else ZERO for k in U] + [ZERO if kind == CYCLE else ONE]
    return Inequality(tuple(coeffs), rhs, kind, seq)


def potential_feasibility(
    t: CsitTopology,
    S: Iterable[int],
    U: Iterable[int],
    private: Mapping[int, Fraction],
    common: Fraction = ZERO,
) -> FeasibilityResult:
    """Decide whether the DoF tuple is achievable by rate-splitting with some
    power policy, and produce that policy or a violated-row certificate.

    Parameters
    ----------
    t : CsitTopology
        Fully connected topology.
    S : iterable of int
        Active users (0-based); ``U`` must be a subset.
    U : iterable of int
        Users carrying private DoF.
    private : mapping
        ``user -> d_p``; users of ``U`` not listed get 0.
    common : Fraction
        Aggregate common DoF.

    Returns
    -------
    FeasibilityResult
        With shortest-path potentials ``r_k = -dist(user k)`` from the
        auxiliary vertex when feasible.  Tuples with a negative or
        above-one entry are rejected with the violated box row.
    """
    _require_fully_connected(t)
    S = set(S)
    U = tuple(sorted(set(U)))
    if not set(U) <= S:
        raise ValueError("U must be a subset of S")
    d = {k: Fraction(private.get(k, 0)) for k in U}
    c = Fraction(common)
    values = [(k, d[k]) for k in U] + [(AUX, c)]
    for idx, (k, v) in enumerate(values):
        if v < 0 or v > 1:
            coeffs = [ZERO] * len(values)
            coeffs[idx] = ONE if v > 1 else -ONE
            return FeasibilityResult(
                False, violated=Inequality(tuple(coeffs), ONE if v > 1 else ZERO, BOX)
            )
    graph = potential_graph(t, U, d, c)
    dist, cycle = _bellman_ford(graph)
    if cycle is not None:
        labels = tuple(graph.vertices[i] for i in cycle)
        length = sum(
            (graph.lengths[(cycle[i], cycle[(i + 1) % len(cycle)])] for i in range(len(cycle))),
            ZERO,
        )
        return FeasibilityResult(
            False,
            circuit=labels,
            circuit_length=length,
            violated=_circuit_inequality(t, U, labels),
        )
    power = [ZERO] * t.K
    for pk, k in enumerate(U, start=1):
        power[k] = -dist[pk]
    return FeasibilityResult(True, power=tuple(power))
