"""Hypergraph packing numbers and the chain structure of the
three-transmitter realistic class.

A hypergraph here has one vertex per group message and one hyperedge per
decoding user (the set of messages that user must decode).  Integer
packings are found by exhaustive search; fractional packings by the exact
LP solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import NotRealisticClass, TooLarge
from .lp import packing_lp, solve_dual, solve_max
from .topology import ONE, ZERO, CsitTopology, format_rational

MAX_PACKING_VERTICES = 20
MAX_TFOLD_STATES = 10**7


@dataclass(frozen=True)
class Hypergraph:
    """Vertices and hyperedges (frozensets of vertices).

    Every vertex must lie in at least one hyperedge and hyperedges are
    nonempty.  Repeated hyperedges are kept; ``distinct_edges`` drops them.
    """

    vertices: tuple[int, ...]
    hyperedges: tuple[frozenset, ...]

    def __post_init__(self):
        verts = set(self.vertices)
        if len(verts) != len(self.vertices):
            raise ValueError("duplicate vertices")
        covered = set()
        for e in self.hyperedges:
            if not e:
                raise ValueError("hyperedges must be nonempty")
            if not e <= verts:
                raise ValueError(f"hyperedge {sorted(e)} uses unknown vertices")
            covered |= e
        if covered != verts:
            raise ValueError(f"vertices {sorted(verts - covered)} lie in no hyperedge")

    @classmethod
    def from_edges(cls, edges: Iterable[Iterable[int]], vertices: Iterable[int] | None = None) -> "Hypergraph":
        hes = tuple(frozenset(e) for e in edges)
        verts = sorted(set().union(*hes)) if vertices is None else sorted(set(vertices))
        return cls(tuple(verts), hes)

    def distinct_edges(self) -> list[frozenset]:
        return sorted(set(self.hyperedges), key=lambda e: (len(e), sorted(e)))

    def indexed_edges(self) -> list[list[int]]:
        """Distinct hyperedges as sorted vertex positions."""
        pos = {v: i for i, v in enumerate(self.vertices)}
        return [sorted(pos[v] for v in e) for e in self.distinct_edges()]


def cycle_hypergraph(n: int) -> Hypergraph:
    """Vertices ``0..n-1`` with edges ``{k, k+1 mod n}``."""
    return Hypergraph.from_edges([(k, (k + 1) % n) for k in range(n)])


def chain_hypergraph(n: int) -> Hypergraph:
    """Path on ``n`` vertices: edges ``{k, k+1}``; a single vertex gets ``{0}``."""
    if n == 1:
        return Hypergraph.from_edges([(0,)])
    return Hypergraph.from_edges([(k, k + 1) for k in range(n - 1)])


def maximum_packing(h: Hypergraph) -> tuple[int, ...]:
    """A largest vertex set with no two members sharing a hyperedge.

    Ties go to the set whose sorted vertex positions come first
    lexicographically.
    """
    n = len(h.vertices)
    if n > MAX_PACKING_VERTICES:
        raise TooLarge(f"{n} vertices exceed the exhaustive-search limit {MAX_PACKING_VERTICES}")
    conflict = [0] * n
    for e in h.indexed_edges():
        for u in e:
            for v in e:
                if u != v:
                    conflict[u] |= 1 << v

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[int, tuple[int, ...]]:
        if not mask:
            return 0, ()
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        size, chosen = best(rest & ~conflict[v])
        take = (size + 1, (v,) + chosen)
        skip = best(rest)
        return take if take[0] >= skip[0] else skip

    return tuple(h.vertices[i] for i in best((1 << n) - 1)[1])


def packing_number(h: Hypergraph) -> int:
    """Size of a largest packing."""
    return len(maximum_packing(h))


def t_fold_packing_number(h: Hypergraph, t: int) -> int:
    """Max ``sum d`` over nonnegative integers with every hyperedge sum at most ``t``."""
    if t < 1:
        raise ValueError("t must be a positive integer")
    n = len(h.vertices)
    if (t + 1) ** n > MAX_TFOLD_STATES:
        raise TooLarge(f"(t+1)^|V| = {(t + 1) ** n} exceeds {MAX_TFOLD_STATES}")
    edges = h.indexed_edges()
    member = [[i for i, e in enumerate(edges) if v in e] for v in range(n)]
    slack = [t] * len(edges)
    best = 0

    def search(v: int, total: int) -> None:
        nonlocal best
        if v == n:
            best = max(best, total)
            return
        # optimistic bound: every remaining vertex takes its own largest value
        bound = total + sum(min(slack[i] for i in member[u]) for u in range(v, n))
        if bound <= best:
            return
        cap = min(slack[i] for i in member[v])
        for x in range(cap, -1, -1):
            for i in member[v]:
                slack[i] -= x
            search(v + 1, total + x)
            for i in member[v]:
                slack[i] += x

    search(0, 0)
    return best


def fractional_packing_number(h: Hypergraph) -> Fraction:
    """LP relaxation optimum ``max 1.d`` s.t. ``sum_{v in e} d_v <= 1``."""
    return _fractional_cached(len(h.vertices), tuple(tuple(e) for e in h.indexed_edges()))


@lru_cache(maxsize=4096)
def _fractional_cached(n: int, edges: tuple[tuple[int, ...], ...]) -> Fraction:
    sol = solve_max(packing_lp(edges, n))
    if not sol.optimal:
        raise RuntimeError(f"packing LP ended with status {sol.status}")
    return sol.value


def fractional_packing_point(h: Hypergraph) -> dict[int, Fraction]:
    """An optimal vertex of the packing LP, keyed by hypergraph vertex."""
    sol = solve_max(packing_lp(h.indexed_edges(), len(h.vertices)))
    if not sol.optimal:
        raise RuntimeError(f"packing LP ended with status {sol.status}")
    return dict(zip(h.vertices, sol.point))


def fractional_packing_dual(h: Hypergraph) -> Fraction:
    """Fractional covering value from the dual LP; equals the packing value."""
    sol = solve_dual(packing_lp(h.indexed_edges(), len(h.vertices)))
    if not sol.optimal:
        raise RuntimeError(f"covering LP ended with status {sol.status}")
    return sol.value


# --- realistic three-transmitter class ---------------------------------------

@dataclass(frozen=True)
class ChainDecomposition:
    """Structure of a layer matrix whose rows each pair a user with one ring neighbour.

    ``chains`` lists vertex sequences in ring order (0-based).  A circuit is
    reported as a single chain with ``is_circuit`` set and ``epsilon == 0``.
    ``rank`` is the exact row rank of the matrix.
    """

    chains: tuple[tuple[int, ...], ...]
    is_circuit: bool
    epsilon: int
    rank: int
    edges: tuple[tuple[int, int], ...]

    @property
    def fractional_packing(self) -> Fraction:
        """Packing value implied by the structure: ``K/2 + epsilon/2``."""
        K = sum(len(c) for c in self.chains)
        return Fraction(K + self.epsilon, 2)


def matrix_rank(rows: Sequence[Sequence[object]]) -> int:
    """Exact rank by fraction-valued Gaussian elimination."""
    M = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        pivot = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        p = M[rank][c]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                f = M[i][c] / p
                M[i] = [x - f * y for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def chain_decomposition(m2: Sequence[Sequence[int]]) -> ChainDecomposition:
    """Split the neighbour graph of a two-ones-per-row matrix into chains.

    Each row ``k`` must have a 1 on the diagonal and exactly one more 1 at
    ``k - 1`` or ``k + 1`` (mod K).  Repeated edges are merged.  When all K
    ring edges are distinct the graph is one circuit; otherwise its
    connected components are paths and ``epsilon`` counts those with an odd
    number of vertices.
    """
    K = len(m2)
    if K < 3 or any(len(row) != K for row in m2):
        raise NotRealisticClass("expected a square matrix with K >= 3")
    edges = set()
    for k, row in enumerate(m2):
        ones = [j for j, x in enumerate(row) if x]
        if any(x not in (0, 1) for x in row) or len(ones) != 2 or k not in ones:
            raise NotRealisticClass("row needs the diagonal and exactly one neighbour", (k + 1,))
        j = ones[0] if ones[1] == k else ones[1]
        if j not in ((k + 1) % K, (k - 1) % K):
            raise NotRealisticClass(f"column {j + 1} is not a ring neighbour", (k + 1,))
        edges.add((min(k, j), max(k, j)))
    rank = matrix_rank(m2)
    if len(edges) == K:
        return ChainDecomposition((tuple(range(K)),), True, 0, rank, tuple(sorted(edges)))
    ring_edge = lambda k: (min(k, (k + 1) % K), max(k, (k + 1) % K))  # noqa: E731
    # start at a vertex whose link to its predecessor is missing, walk forward
    start = next(k for k in range(K) if ring_edge((k - 1) % K) not in edges)
    chains = []
    current = [start]
    for step in range(1, K):
        k = (start + step) % K
        if ring_edge((k - 1) % K) in edges:
            current.append(k)
        else:
            chains.append(tuple(current))
            current = [k]
    chains.append(tuple(current))
    epsilon = sum(1 for c in chains if len(c) % 2)
    return ChainDecomposition(tuple(chains), False, epsilon, rank, tuple(sorted(edges)))


@dataclass(frozen=True)
class RealisticParameters:
    """Qualities ``a <= b`` and per-user orientation of a realistic-class topology.

    ``weak_neighbour[k]`` is the ring neighbour that user ``k`` sees with
    quality ``a``.
    """

    K: int
    a: Fraction
    b: Fraction
    weak_neighbour: tuple[int, ...]


def realistic_parameters(t: CsitTopology) -> RealisticParameters:
    """Recognize the three-transmitter class and read off ``a``, ``b`` and orientation."""
    K = t.K
    if K < 3:
        raise NotRealisticClass("the class needs K >= 3")
    pairs = []
    for k in range(K):
        nxt, prv = (k + 1) % K, (k - 1) % K
        heard = {j for j in range(K) if t.connectivity[k][j]}
        if heard != {k, nxt, prv}:
            raise NotRealisticClass("user must hear exactly itself and its two ring neighbours", (k + 1,))
        pairs.append((t.quality(k, nxt), t.quality(k, prv)))
    values = sorted({q for p in pairs for q in p})
    if len(values) > 2:
        raise NotRealisticClass(
            "more than two distinct qualities: " + ", ".join(format_rational(v) for v in values)
        )
    a, b = values[0], values[-1]
    weak = []
    for k, (q_next, q_prev) in enumerate(pairs):
        if {q_next, q_prev} != {a, b}:
            raise NotRealisticClass("each user needs one link of each quality", (k + 1,))
        weak.append((k + 1) % K if q_next == a else (k - 1) % K)
    return RealisticParameters(K, a, b, tuple(weak))


def realistic_layer_matrix(params: RealisticParameters) -> list[list[int]]:
    """Rows pair each user with the neighbour it sees at quality ``a``."""
    K = params.K
    m2 = [[0] * K for _ in range(K)]
    for k, j in enumerate(params.weak_neighbour):
        m2[k][k] = 1
        m2[k][j] = 1
    return m2


def neighbourhood_hypergraph(K: int) -> Hypergraph:
    """Each user decodes the messages of itself and both ring neighbours."""
    return Hypergraph.from_edges([((k - 1) % K, k, (k + 1) % K) for k in range(K)])


def realistic_sum_dof(t: CsitTopology) -> Fraction:
    """Sum DoF of unicasting privates at exponent ``a`` plus two group layers.

    ``K a + (b - a)(K/2 + eps/2) + (K/3)(1 - b)``, where ``eps`` counts
    odd chains of the quality-``a`` neighbour graph.  With ``a == b`` the
    middle term vanishes and ``eps`` is taken as 0.
    """
    params = realistic_parameters(t)
    return realistic_sum_dof_closed_form(params.K, params.a, params.b, realistic_epsilon(params))


def realistic_epsilon(params: RealisticParameters) -> int:
    if params.a == params.b:
        return 0
    return chain_decomposition(realistic_layer_matrix(params)).epsilon


def realistic_sum_dof_closed_form(K: int, a, b, epsilon: int) -> Fraction:
    a, b = Fraction(a), Fraction(b)
    return K * a + (b - a) * Fraction(K + epsilon, 2) + Fraction(K, 3) * (ONE - b)


def realistic_bounds(K: int, a, b) -> tuple[Fraction, Fraction]:
    """(worst, best) sum DoF over orientations: ``eps = 0`` and ``eps = K/3``."""
    a, b = Fraction(a), Fraction(b)
    worst = Fraction(K, 3) * (ONE + b / 2 + 3 * a / 2)
    best = Fraction(K, 3) * (ONE + b + a)
    return worst, best

