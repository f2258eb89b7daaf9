"""Exact rational linear programming.

A dictionary-form simplex over ``fractions.Fraction`` with Bland's
anti-cycling rule.  Infeasible starting dictionaries are repaired with a
single auxiliary variable (phase one), free variables are split into a
difference of two nonnegative ones.  Problems here have at most a few
dozen variables, so clarity wins over speed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import MalformedPacking

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _frac_vector(values) -> tuple[Fraction, ...]:
    return tuple(v if isinstance(v, Fraction) else Fraction(v) for v in values)


@dataclass(frozen=True)
class LinearProgram:
    """Maximize ``objective . x`` subject to ``rows[i] . x <= rhs[i]``.

    ``nonnegative[v]`` marks variables constrained to ``x_v >= 0``; the
    remaining variables are free.
    """

    objective: tuple[Fraction, ...]
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    nonnegative: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "objective", _frac_vector(self.objective))
        object.__setattr__(self, "rows", tuple(_frac_vector(r) for r in self.rows))
        object.__setattr__(self, "rhs", _frac_vector(self.rhs))
        n = len(self.objective)
        if n == 0:
            raise ValueError("a linear program needs at least one variable")
        if not self.nonnegative:
            object.__setattr__(self, "nonnegative", (True,) * n)
        object.__setattr__(self, "nonnegative", tuple(bool(f) for f in self.nonnegative))
        if len(self.nonnegative) != n:
            raise ValueError("one nonnegativity flag per variable")
        if len(self.rows) != len(self.rhs):
            raise ValueError("one right-hand side per row")
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise ValueError(f"row {i} has width {len(row)}, expected {n}")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def is_feasible_point(self, x: Sequence[Fraction]) -> bool:
        if any(flag and xv < 0 for flag, xv in zip(self.nonnegative, x)):
            return False
        return all(
            sum(c * xv for c, xv in zip(row, x)) <= b for row, b in zip(self.rows, self.rhs)
        )


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Dictionary:
    """``x_B[i] = b[i] - sum_j T[i][j] x_N[j]``, ``z = z0 + sum_j c[j] x_N[j]``."""

    def __init__(self, basis, nonbasis, T, b, c, z0=_ZERO):
        self.basis = basis
        self.nonbasis = nonbasis
        self.T = T
        self.b = b
        self.c = c
        self.z0 = z0

    def pivot(self, r: int, s: int) -> None:
        T, b, c = self.T, self.b, self.c
        row = T[r]
        p = row[s]
        inv = _ONE / p
        new_row = [x * inv if x else x for x in row]
        new_row[s] = inv
        br = b[r] * inv
        T[r] = new_row
        b[r] = br
        for i, other in enumerate(T):
            if i == r:
                continue
            f = other[s]
            if not f:
                continue
            for j, x in enumerate(new_row):
                if x:
                    other[j] -= f * x
            other[s] = -f * inv
            b[i] -= f * br
        f = c[s]
        if f:
            for j, x in enumerate(new_row):
                if x:
                    c[j] -= f * x
            c[s] = -f * inv
            self.z0 += f * br
        self.basis[r], self.nonbasis[s] = self.nonbasis[s], self.basis[r]

    def entering(self) -> int | None:
        best = None
        for j, cj in enumerate(self.c):
            if cj > 0 and (best is None or self.nonbasis[j] < self.nonbasis[best]):
                best = j
        return best

    def leaving(self, s: int) -> int | None:
        best = None
        best_ratio = None
        for i, row in enumerate(self.T):
            t = row[s]
            if t > 0:
                ratio = self.b[i] / t
                if (
                    best is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self.basis[i] < self.basis[best])
                ):
                    best, best_ratio = i, ratio
        return best

    def run(self) -> str:
        while True:
            s = self.entering()
            if s is None:
                return OPTIMAL
            r = self.leaving(s)
            if r is None:
                return UNBOUNDED
            self.pivot(r, s)

    def values(self, n_vars: int) -> list[Fraction]:
        x = [_ZERO] * n_vars
        for i, v in enumerate(self.basis):
            if v < n_vars:
                x[v] = self.b[i]
        return x


def _standardize(lp: LinearProgram):
    """Split free variables; return (A, c, mapping) with all variables nonnegative."""
    mapping = []  # for each original variable: list of (column, sign)
    columns = 0
    for flag in lp.nonnegative:
        if flag:
            mapping.append([(columns, 1)])
            columns += 1
        else:
            mapping.append([(columns, 1), (columns + 1, -1)])
            columns += 2
    A = []
    for row in lp.rows:
        new = [_ZERO] * columns
        for v, coeff in enumerate(row):
            for col, sign in mapping[v]:
                new[col] = coeff if sign > 0 else -coeff
        A.append(new)
    c = [_ZERO] * columns
    for v, coeff in enumerate(lp.objective):
        for col, sign in mapping[v]:
            c[col] = coeff if sign > 0 else -coeff
    return A, c, mapping, columns


def _feasible_dictionary(A, b, n) -> _Dictionary | None:
    """Dictionary for ``A x <= b, x >= 0`` whose basic solution is feasible,
    or None when the system is infeasible."""
    m = len(A)
    basis = list(range(n, n + m))
    if all(bi >= 0 for bi in b):
        return _Dictionary(basis, list(range(n)), [list(row) for row in A], list(b), [_ZERO] * n)
    aux = n + m
    T = [list(row) + [-_ONE] for row in A]
    d = _Dictionary(basis, list(range(n)) + [aux], T, list(b), [_ZERO] * n + [-_ONE])
    r = min(range(m), key=lambda i: (b[i], basis[i]))
    d.pivot(r, n)
    d.run()
    if d.z0 < 0:
        return None
    if aux in d.basis:
        r = d.basis.index(aux)
        s = min(
            (j for j, x in enumerate(d.T[r]) if x),
            key=lambda j: d.nonbasis[j],
        )
        d.pivot(r, s)
    s = d.nonbasis.index(aux)
    for row in d.T:
        del row[s]
    del d.nonbasis[s]
    return d


def _install_objective(d: _Dictionary, c: Sequence[Fraction]) -> None:
    pos = {v: j for j, v in enumerate(d.nonbasis)}
    new_c = [_ZERO] * len(d.nonbasis)
    z0 = _ZERO
    for v, cv in enumerate(c):
        if not cv:
            continue
        if v in pos:
            new_c[pos[v]] += cv
        else:
            i = d.basis.index(v)
            z0 += cv * d.b[i]
            for j, t in enumerate(d.T[i]):
                if t:
                    new_c[j] -= cv * t
    d.c = new_c
    d.z0 = z0


def solve_max(lp: LinearProgram) -> LpSolution:
    """Exact optimum of ``lp``; the point returned is a basic (vertex) solution."""
    A, c, mapping, n = _standardize(lp)
    d = _feasible_dictionary(A, list(lp.rhs), n)
    if d is None:
        return LpSolution(INFEASIBLE)
    _install_objective(d, c)
    if d.run() == UNBOUNDED:
        return LpSolution(UNBOUNDED)
    y = d.values(n)
    x = tuple(sum((y[col] if sign > 0 else -y[col] for col, sign in parts), _ZERO) for parts in mapping)
    return LpSolution(OPTIMAL, d.z0, x)


def solve_min(lp: LinearProgram) -> LpSolution:
    """Minimize ``lp.objective . x`` under the same constraints."""
    neg = LinearProgram(tuple(-v for v in lp.objective), lp.rows, lp.rhs, lp.nonnegative)
    sol = solve_max(neg)
    if not sol.optimal:
        return sol
    return LpSolution(OPTIMAL, -sol.value, sol.point)


def is_packing_form(lp: LinearProgram) -> bool:
    return (
        all(lp.nonnegative)
        and all(v == 1 for v in lp.objective)
        and all(b == 1 for b in lp.rhs)
        and all(x >= 0 for row in lp.rows for x in row)
    )


def packing_lp(hyperedges: Sequence[Sequence[int]], n_vertices: int) -> LinearProgram:
    """``max sum d`` s.t. ``sum_{v in e} d_v <= 1`` for each hyperedge ``e``."""
    rows = []
    for edge in hyperedges:
        row = [_ZERO] * n_vertices
        for v in edge:
            row[v] = _ONE
        rows.append(row)
    return LinearProgram((_ONE,) * n_vertices, rows, (_ONE,) * len(rows))


def solve_dual(lp: LinearProgram) -> LpSolution:
    """Solve the covering dual ``min 1.y`` s.t. ``A^T y >= 1, y >= 0`` of a packing LP.

    The returned value is the dual optimum and ``point`` the dual vector ``y``.
    This route runs through phase one, independent of the primal's trivial
    starting basis.
    """
    if not is_packing_form(lp):
        raise MalformedPacking("expected max 1.d subject to A d <= 1, A >= 0, d >= 0")
    m = len(lp.rows)
    if m == 0:
        return LpSolution(INFEASIBLE)
    rows = [[-lp.rows[i][v] for i in range(m)] for v in range(lp.n_vars)]
    dual = LinearProgram((-_ONE,) * m, rows, (-_ONE,) * lp.n_vars)
    sol = solve_max(dual)
    if not sol.optimal:
        return sol
    return LpSolution(OPTIMAL, -sol.value, sol.point)


def enumerate_vertices(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[tuple[Fraction, ...]]:
    """All vertices of the bounded polytope ``{x >= 0 : A x <= b}`` with ``b >= 0``.

    Breadth-first search over feasible bases starting from the slack basis;
    every ratio-test tie is followed so degenerate vertices are reached.
    """
    b = _frac_vector(rhs)
    if any(x < 0 for x in b):
        raise ValueError("enumerate_vertices needs a nonnegative right-hand side")
    A = [list(_frac_vector(r)) for r in rows]
    n = len(A[0]) if A else 0
    m = len(A)
    start = _Dictionary(list(range(n, n + m)), list(range(n)), A, list(b), [_ZERO] * n)
    seen = {frozenset(start.basis)}
    vertices = {tuple(start.values(n))}
    queue = deque([start])
    while queue:
        d = queue.popleft()
        for s in range(len(d.nonbasis)):
            candidates = [i for i, row in enumerate(d.T) if row[s] > 0]
            if not candidates:
                continue
            best = min(d.b[i] / d.T[i][s] for i in candidates)
            for r in candidates:
                if d.b[r] / d.T[r][s] != best:
                    continue
                key = frozenset(d.basis[:r] + [d.nonbasis[s]] + d.basis[r + 1 :])
                if key in seen:
                    continue
                seen.add(key)
                nd = _Dictionary(list(d.basis), list(d.nonbasis), [list(x) for x in d.T], list(d.b), list(d.c))
                nd.pivot(r, s)
                vertices.add(tuple(nd.values(n)))
                queue.append(nd)
    return sorted(vertices)
