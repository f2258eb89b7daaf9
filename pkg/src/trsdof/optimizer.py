"""Sum-DoF maximization for zero-forcing, rate-splitting and topological
rate-splitting, plus the cyclic closed forms and scheme comparison.

Topological rate-splitting is optimized exactly.  For a fixed active set
``S`` the common part of a plan depends on the private exponents only
through ``r0 = max r_k``: it equals ``F_S(r0)``, the integral from ``r0`` to
1 of the layer packing value.  That integrand is a nonincreasing step
function with steps at the cross-link qualities, so ``F_S`` is convex and
piecewise linear.  Users without private DoF can be silenced (``r_k = 0``)
without hurting anyone, so it suffices to enumerate the set ``U`` of users
with private DoF and, on each linear piece of ``F_S``, solve one small LP
over ``(r, d, r0)``.  A grid search over candidate exponents is kept as an
alternative for cross-checking.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

from .errors import ClosedFormMismatch, InvalidOrder, NotFullyConnected, NotRealisticClass, SizeBound
from .lp import LinearProgram, solve_max
from .packing import (
    Hypergraph,
    fractional_packing_number,
    maximum_packing,
    realistic_parameters,
    realistic_sum_dof,
)
from .regions import potential_feasibility, region_optimum, rs_region, zfbf_region
from .topology import (
    ONE,
    ZERO,
    CsitTopology,
    as_rational,
    effective_zfbf_topology,
    format_decimal,
    format_rational,
)
from .trs import MAXIMAL, ORTHOGONAL, build_trs_plan, plan_sum_dof, private_dof

ZFBF = "zfbf"
RS = "rs"
TRS_ORTH = "trs-orth"
TRS_MAX = "trs-max"
ALL_SCHEMES = (ZFBF, RS, TRS_ORTH, TRS_MAX)

EXACT = "exact"
GRID = "grid"


@dataclass(frozen=True)
class SweepConfig:
    """Search settings shared by the sum-DoF operations.

    Attributes
    ----------
    max_users : int
        Refuse topologies with more users than this (subset enumeration is
        exponential).
    search : str
        ``"exact"`` for the piecewise-LP search or ``"grid"`` for a search
        over candidate exponents.
    candidate_exponents : tuple of Fraction, optional
        Grid mode only.  Defaults to the distinct qualities, 0, 1 and the
        combinations ``2x - y`` and ``1 - x + y`` of qualities that land in
        [0, 1].
    extra_exponents : tuple of Fraction
        Grid mode only, added to the candidates.
    max_grid_policies : int
        Grid mode budget on the number of evaluated ``(S, r)`` pairs.
    schemes : tuple of str
        Schemes run by :func:`compare_schemes`.
    check_closed_forms : bool
        Raise :class:`ClosedFormMismatch` in :func:`compare_schemes` when an
        LP value contradicts a closed form.
    """

    max_users: int = 8
    search: str = EXACT
    candidate_exponents: tuple[Fraction, ...] | None = None
    extra_exponents: tuple[Fraction, ...] = ()
    max_grid_policies: int = 200_000
    schemes: tuple[str, ...] = ALL_SCHEMES
    check_closed_forms: bool = True

    def __post_init__(self):
        if self.search not in (EXACT, GRID):
            raise ValueError(f"unknown search mode {self.search!r}")
        for name in ("candidate_exponents", "extra_exponents"):
            values = getattr(self, name)
            if values is None:
                continue
            values = tuple(as_rational(v) for v in values)
            if any(not ZERO <= v <= ONE for v in values):
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, values)
        unknown = set(self.schemes) - set(ALL_SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}")


DEFAULT_CONFIG = SweepConfig()


@dataclass(frozen=True)
class SchemeResult:
    """Best sum DoF of one scheme with a witness.

    ``S`` is the set of active users (0-based), ``U`` the users carrying
    private DoF, ``r`` a full-length power policy, ``private`` the private
    DoF per user, ``common`` the aggregate common DoF (rate-splitting only)
    and ``layers`` the ``(lower, upper, packing)`` triples of a TRS plan.
    """

    scheme: str
    value: Fraction
    S: tuple[int, ...]
    U: tuple[int, ...]
    r: tuple[Fraction, ...]
    private: tuple[Fraction, ...]
    common: Fraction | None = None
    layers: tuple[tuple[Fraction, Fraction, Fraction], ...] = ()


def _check_size(t: CsitTopology, cfg: SweepConfig) -> None:
    if t.K > cfg.max_users:
        raise SizeBound(f"K={t.K} exceeds the subset enumeration bound {cfg.max_users}")


def _subsets(users: Sequence[int], include_empty: bool = False):
    start = 0 if include_empty else 1
    for m in range(start, len(users) + 1):
        yield from combinations(users, m)


def _as_fully_connected(t: CsitTopology) -> CsitTopology:
    return t if t.is_fully_connected() else effective_zfbf_topology(t)


# --- zero-forcing and rate-splitting ----------------------------------------

def sum_dof_zfbf(t: CsitTopology, cfg: SweepConfig = DEFAULT_CONFIG) -> SchemeResult:
    """Best private-only sum DoF over all active sets.

    Partially connected topologies are handled through
    :func:`effective_zfbf_topology`.  The witness power policy is recovered
    from the shortest-path potentials of the optimal tuple.
    """
    _check_size(t, cfg)
    te = _as_fully_connected(t)
    best = None
    for U in _subsets(range(t.K)):
        sol = region_optimum(zfbf_region(te, U, prune=True), [1] * len(U))
        if best is None or sol.value > best[0]:
            best = (sol.value, U, sol.point)
    value, U, point = best
    d = dict(zip(U, point))
    feas = potential_feasibility(te, U, U, d, ZERO)
    assert feas.feasible, "LP optimum must be achievable"
    priv = private_dof(te, U, feas.power)
    assert all(priv[k] >= d[k] for k in U)
    return SchemeResult(ZFBF, value, U, U, feas.power, priv)


def sum_dof_rs(t: CsitTopology, cfg: SweepConfig = DEFAULT_CONFIG) -> SchemeResult:
    """Best rate-splitting sum DoF (private plus one multicast common layer)."""
    _check_size(t, cfg)
    if not t.is_fully_connected():
        raise NotFullyConnected("rate-splitting regions are defined for fully connected networks only")
    best = None
    for U in _subsets(range(t.K), include_empty=True):
        region = rs_region(t, U, prune=True)
        sol = region_optimum(region, [1] * region.dimension)
        if best is None or sol.value > best[0]:
            best = (sol.value, U, sol.point)
    value, U, point = best
    d = dict(zip(U, point[:-1]))
    common = point[-1]
    S = tuple(range(t.K))
    feas = potential_feasibility(t, S, U, d, common)
    assert feas.feasible, "LP optimum must be achievable"
    priv = private_dof(t, S, feas.power)
    return SchemeResult(RS, value, S, U, feas.power, priv, common)


# --- topological rate-splitting ---------------------------------------------

class _CommonProfile:
    """``F_S`` for one active set: breakpoints, slopes and values."""

    def __init__(self, t: CsitTopology, S: tuple[int, ...], mode: str, breaks: Sequence[Fraction]):
        self.breaks = list(breaks)
        self.slopes = []
        for lo, hi in zip(self.breaks, self.breaks[1:]):
            edges = [
                frozenset({k} | {j for j in S if j != k and t.quality(k, j) < hi}) for k in S
            ]
            h = Hypergraph(S, tuple(edges))
            if mode == MAXIMAL:
                self.slopes.append(fractional_packing_number(h))
            else:
                self.slopes.append(Fraction(len(maximum_packing(h))))
        self.values = [ZERO] * len(self.breaks)
        for i in range(len(self.breaks) - 2, -1, -1):
            width = self.breaks[i + 1] - self.breaks[i]
            self.values[i] = self.values[i + 1] + width * self.slopes[i]

    def __call__(self, r0: Fraction) -> Fraction:
        for i in range(len(self.breaks) - 1):
            lo, hi = self.breaks[i], self.breaks[i + 1]
            if lo <= r0 <= hi:
                return self.values[i + 1] + (hi - r0) * self.slopes[i]
        raise ValueError("r0 outside [0, 1]")


def _private_lp(t: CsitTopology, U: tuple[int, ...], lo: Fraction, hi: Fraction, slope: Fraction):
    """max sum d - slope * r0 over (r_U, d_U, r0) with r0 in [lo, hi]."""
    n = len(U)
    nv = 2 * n + 1  # r_0..r_{n-1}, d_0..d_{n-1}, r0
    R0 = 2 * n
    rows, rhs = [], []

    def row(entries, bound):
        coeffs = [ZERO] * nv
        for idx, c in entries:
            coeffs[idx] += c
        rows.append(coeffs)
        rhs.append(bound)

    for p, k in enumerate(U):
        row([(n + p, ONE), (p, -ONE)], ZERO)
        for q, j in enumerate(U):
            if j != k:
                row([(n + p, ONE), (p, -ONE), (q, ONE)], t.quality(k, j))
        row([(p, ONE), (R0, -ONE)], ZERO)
    row([(R0, ONE)], hi)
    row([(R0, -ONE)], -lo)
    objective = [ZERO] * n + [ONE] * n + [-slope]
    sol = solve_max(LinearProgram(objective, rows, rhs))
    if not sol.optimal:
        return None
    return sol.point[:n]


def _grid_exponents(t: CsitTopology, cfg: SweepConfig) -> list[Fraction]:
    if cfg.candidate_exponents is not None:
        values = set(cfg.candidate_exponents)
    else:
        qs = set(t.distinct_qualities())
        values = qs | {ZERO, ONE}
        for x in qs:
            for y in qs:
                for v in (2 * x - y, ONE - x + y):
                    if ZERO <= v <= ONE:
                        values.add(v)
    values |= set(cfg.extra_exponents)
    return sorted(values)


def _witness_key(S, r):
    return (S, r)


def sum_dof_trs(
    t: CsitTopology,
    cfg: SweepConfig = DEFAULT_CONFIG,
    mode: str = MAXIMAL,
) -> SchemeResult:
    """Best topological rate-splitting sum DoF over active sets and power policies.

    Parameters
    ----------
    t : CsitTopology
        Absent links are treated as quality-1 links, which leak nothing.
    cfg : SweepConfig
        ``search="exact"`` (default) returns the true maximum over all
        real-valued policies; ``search="grid"`` the maximum over the
        candidate-exponent grid.
    mode : {"maximal", "orthogonal"}
        Fractional or integer packing in each layer.

    Notes
    -----
    Ties are broken towards the smallest ``(S, r)`` among evaluated
    candidates, so results are deterministic.
    """
    if mode not in (MAXIMAL, ORTHOGONAL):
        raise ValueError(f"unknown groupcasting mode {mode!r}")
    _check_size(t, cfg)
    te = _as_fully_connected(t)
    K = te.K
    breaks = sorted(set(te.distinct_qualities()) | {ZERO, ONE})
    profiles = {}

    def profile(S):
        if S not in profiles:
            profiles[S] = _CommonProfile(te, S, mode, breaks)
        return profiles[S]

    best: list = [None]

    def consider(S, r):
        F = profile(S)
        priv = private_dof(te, S, r)
        r0 = max(r[k] for k in S)
        value = sum(priv, ZERO) + F(r0)
        key = _witness_key(S, r)
        cur = best[0]
        if cur is None or value > cur[0] or (value == cur[0] and key < cur[1]):
            best[0] = (value, key)

    if cfg.search == GRID:
        grid = _grid_exponents(te, cfg)
        total = sum(len(grid) ** len(S) for S in _subsets(range(K)))
        if total > cfg.max_grid_policies:
            raise SizeBound(f"grid search needs {total} policies, budget {cfg.max_grid_policies}")
        for S in _subsets(range(K)):
            for values in product(grid, repeat=len(S)):
                r = [ZERO] * K
                for k, v in zip(S, values):
                    r[k] = v
                consider(S, tuple(r))
    else:
        _exact_trs_search(te, profile, consider, best)

    value, (S, r) = best[0]
    plan = build_trs_plan(te, S, r)
    pv = plan_sum_dof(plan, mode)
    assert pv.total == value, "plan value must match the search value"
    priv = private_dof(te, S, r)
    U = tuple(k for k in S if priv[k] > 0)
    return SchemeResult(TRS_MAX if mode == MAXIMAL else TRS_ORTH, value, S, U, r, priv, None, pv.layer_terms)


def _exact_trs_search(te, profile, consider, best):
    K = te.K
    lp_cache = {}
    for S in _subsets(range(K)):
        F = profile(S)
        consider(S, (ZERO,) * K)
        for U in _subsets(S):
            n = len(U)
            for i, slope in enumerate(F.slopes):
                if slope >= n:
                    # the private sum grows with slope at most |U|, so the
                    # left endpoint wins and is covered by the previous piece
                    continue
                lo, hi = F.breaks[i], F.breaks[i + 1]
                # sum d - slope*r0 <= (n - slope)*hi, hence this bound
                if best[0] is not None and n * hi + F.values[i + 1] < best[0][0]:
                    continue
                key = (U, lo, hi, slope)
                if key not in lp_cache:
                    lp_cache[key] = _private_lp(te, U, lo, hi, slope)
                r_u = lp_cache[key]
                if r_u is None:
                    continue
                r = [ZERO] * K
                for k, v in zip(U, r_u):
                    r[k] = v
                consider(S, tuple(r))


# --- closed forms -------------------------------------------------------------

def cyclic_zfbf_closed_form(K: int, a, b) -> Fraction:
    """Zero-forcing sum DoF of the cyclic realistic topology, by case analysis.

    Even K: ``K a`` if ``a >= 1/2`` else ``K/2``.  Odd K: ``K a`` if
    ``a >= 1/2``; ``floor(K/2) - 1 + a + b`` if ``1 - b <= a <= 1/2``;
    ``floor(K/2)`` otherwise.
    """
    a, b = as_rational(a), as_rational(b)
    if a > b:
        raise InvalidOrder(f"a={format_rational(a)} exceeds b={format_rational(b)}")
    half = Fraction(1, 2)
    if K % 2 == 0:
        return K * a if a >= half else Fraction(K, 2)
    h = K // 2
    if a >= half:
        return K * a
    if ONE - b <= a:
        return h - 1 + a + b
    return Fraction(h)


def trs_advantage_condition(K: int, a, b) -> bool:
    """True iff ``b + 3a > (6/K) floor(K/2) - 2``."""
    a, b = as_rational(a), as_rational(b)
    return b + 3 * a > Fraction(6, K) * (K // 2) - 2


def realistic_plan_value(t: CsitTopology) -> Fraction:
    """Sum DoF of the all-users plan with every private exponent equal to ``a``,
    computed through the general plan machinery."""
    params = realistic_parameters(t)
    te = effective_zfbf_topology(t)
    plan = build_trs_plan(te, range(t.K), [params.a] * t.K)
    return plan_sum_dof(plan, MAXIMAL).total


def is_cyclic_orientation(t: CsitTopology) -> bool:
    try:
        params = realistic_parameters(t)
    except NotRealisticClass:
        return False
    K = t.K
    forward = all(params.weak_neighbour[k] == (k + 1) % K for k in range(K))
    backward = all(params.weak_neighbour[k] == (k - 1) % K for k in range(K))
    return forward or backward or params.a == params.b


# --- comparison ---------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormCheck:
    name: str
    expected: Fraction
    computed: Fraction
    relation: str  # "==" or ">="

    @property
    def ok(self) -> bool:
        if self.relation == "==":
            return self.computed == self.expected
        return self.computed >= self.expected


@dataclass(frozen=True)
class ComparisonReport:
    """Per-scheme optima, closed-form checks and advantage flags."""

    topology: CsitTopology
    results: dict = field(default_factory=dict)
    checks: tuple[ClosedFormCheck, ...] = ()
    flags: dict = field(default_factory=dict)

    def value(self, scheme: str) -> Fraction | None:
        res = self.results.get(scheme)
        return None if res is None else res.value

    def rows(self) -> list[dict[str, str]]:
        out = []
        for scheme in ALL_SCHEMES:
            res = self.results.get(scheme)
            if res is None:
                continue
            out.append(
                {
                    "scheme": scheme,
                    "value_num": str(res.value.numerator),
                    "value_den": str(res.value.denominator),
                    "S": " ".join(str(k + 1) for k in res.S),
                    "r": " ".join(format_rational(x) for x in res.r),
                    "layers": _format_layers(res),
                }
            )
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        for scheme in ALL_SCHEMES:
            res = self.results.get(scheme)
            if res is None:
                if scheme in self.flags.get("not_applicable", ()):
                    lines.append(f"{scheme:9s} n/a (needs a fully connected network)")
                continue
            lines.append(f"{scheme:9s} {format_rational(res.value):>8s}  {format_decimal(res.value)}")
        for chk in self.checks:
            lines.append(
                f"check {chk.name}: {format_rational(chk.computed)} {chk.relation} "
                f"{format_rational(chk.expected)} {'ok' if chk.ok else 'MISMATCH'}"
            )
        for name, flag in sorted(self.flags.items()):
            if name != "not_applicable":
                lines.append(f"{name}: {'yes' if flag else 'no'}")
        return "\n".join(lines) + "\n"


CSV_COLUMNS = ["scheme", "value_num", "value_den", "S", "r", "layers"]


def _format_layers(res: SchemeResult) -> str:
    if res.layers:
        return ";".join(
            f"{format_rational(lo)}:{format_rational(hi)}:{format_rational(p)}" for lo, hi, p in res.layers
        )
    if res.common is not None:
        return f"common={format_rational(res.common)}"
    return ""


def compare_schemes(t: CsitTopology, cfg: SweepConfig = DEFAULT_CONFIG) -> ComparisonReport:
    """Run every enabled scheme and cross-check against the closed forms that apply.

    Rate-splitting is skipped (reported as not applicable) on partially
    connected topologies.  For the three-transmitter realistic class the
    all-users plan is checked against the chain formula and, for cyclic
    orientations, the zero-forcing value against
    :func:`cyclic_zfbf_closed_form`.
    """
    results = {}
    not_applicable = []
    for scheme in cfg.schemes:
        if scheme == ZFBF:
            results[scheme] = sum_dof_zfbf(t, cfg)
        elif scheme == RS:
            if t.is_fully_connected():
                results[scheme] = sum_dof_rs(t, cfg)
            else:
                not_applicable.append(scheme)
        elif scheme == TRS_ORTH:
            results[scheme] = sum_dof_trs(t, cfg, ORTHOGONAL)
        elif scheme == TRS_MAX:
            results[scheme] = sum_dof_trs(t, cfg, MAXIMAL)

    checks = []
    flags: dict = {"not_applicable": tuple(not_applicable)}
    try:
        params = realistic_parameters(t)
    except NotRealisticClass:
        params = None
    if params is not None:
        closed = realistic_sum_dof(t)
        checks.append(ClosedFormCheck("realistic-plan", closed, realistic_plan_value(t), "=="))
        if TRS_MAX in results:
            checks.append(ClosedFormCheck("trs-max>=realistic-plan", closed, results[TRS_MAX].value, ">="))
        if is_cyclic_orientation(t):
            zf_closed = cyclic_zfbf_closed_form(t.K, params.a, params.b)
            if ZFBF in results:
                checks.append(ClosedFormCheck("cyclic-zfbf", zf_closed, results[ZFBF].value, "=="))
            flags["advantage_condition"] = trs_advantage_condition(t.K, params.a, params.b)
            flags["realistic_plan_beats_zfbf_closed_form"] = closed > zf_closed
    if TRS_MAX in results:
        for other in (RS, ZFBF):
            if other in results:
                flags[f"trs_beats_{other}"] = results[TRS_MAX].value > results[other].value
    report = ComparisonReport(t, results, tuple(checks), flags)
    if cfg.check_closed_forms:
        for chk in checks:
            if not chk.ok:
                raise ClosedFormMismatch(
                    f"{chk.name}: computed {format_rational(chk.computed)}, closed form "
                    f"{format_rational(chk.expected)}"
                )
    return report
