"""Topological rate-splitting plans.

Given an active set ``S`` and private exponents ``r``, the power range
above ``r0 = max r_k`` is cut at every distinct cross-link quality that
exceeds ``r0``.  In each resulting power layer, transmitter ``k`` sends one
group message that must be decoded by every user whose CSIT on the link to
``k`` is too coarse to push the interference below that layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import NotFullyConnected
from .packing import (
    Hypergraph,
    fractional_packing_number,
    fractional_packing_point,
    maximum_packing,
)
from .topology import (
    ONE,
    ZERO,
    CsitTopology,
    active_set,
    format_rational,
    power_policy,
)

ORTHOGONAL = "orthogonal"
MAXIMAL = "maximal"


@dataclass(frozen=True)
class Layer:
    """One common power layer.

    Sequences indexed by position follow the plan's active set order.

    Attributes
    ----------
    index : int
        Layer number, 2 for the lowest common layer.
    lower, upper : Fraction
        Power-exponent interval shared by all transmitters.
    tx_lower : tuple of Fraction
        Per-transmitter lower exponent.  In the lowest common layer a
        transmitter whose private exponent is below ``r0`` starts at its own
        exponent; every other layer starts at ``lower``.
    decode_sets : tuple of frozenset
        Transmitters whose layer message each user must decode.
    groups : tuple of frozenset
        Users that decode each transmitter's layer message.
    matrix : tuple of tuple of int
        ``matrix[k][j] == 1`` exactly when user ``k`` decodes message ``j``.
    """

    index: int
    lower: Fraction
    upper: Fraction
    tx_lower: tuple[Fraction, ...]
    decode_sets: tuple[frozenset, ...]
    groups: tuple[frozenset, ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


@dataclass(frozen=True)
class TrsPlan:
    topology: CsitTopology
    S: tuple[int, ...]
    r: tuple[Fraction, ...]
    r0: Fraction
    thresholds: tuple[Fraction, ...]
    layers: tuple[Layer, ...]

    @property
    def L(self) -> int:
        """Number of quality thresholds strictly above ``r0``."""
        return len(self.thresholds) - 1

    def position(self, user: int) -> int:
        return self.S.index(user)

    def hypergraph(self, layer: Layer) -> Hypergraph:
        return Hypergraph(self.S, tuple(layer.decode_sets))


def private_dof(t: CsitTopology, S: Iterable[int], r: Sequence[object]) -> tuple[Fraction, ...]:
    """Private DoF under zero-forcing with exponents ``r`` for active users ``S``.

    ``d_k = (r_k - max_{j in S, j != k} (r_j - a_kj)^+)^+`` for ``k`` in ``S``
    and 0 elsewhere.
    """
    S = active_set(S, t.K)
    r = power_policy(r, t.K)
    out = [ZERO] * t.K
    for k in S:
        worst = max((max(r[j] - t.quality(k, j), ZERO) for j in S if j != k), default=ZERO)
        out[k] = max(r[k] - worst, ZERO)
    return tuple(out)


def build_trs_plan(t: CsitTopology, S: Iterable[int], r: Sequence[object]) -> TrsPlan:
    """Layers, decode sets, groups and connectivity matrices for ``(S, r)``."""
    S = active_set(S, t.K)
    r = power_policy(r, t.K)
    if not t.is_fully_connected(S):
        missing = next((k, j) for k in S for j in S if not t.connectivity[k][j])
        raise NotFullyConnected("active set must be fully connected", (missing[0] + 1, missing[1] + 1))
    r0 = max(r[k] for k in S)
    cuts = sorted({t.quality(k, j) for k in S for j in S if k != j and t.quality(k, j) > r0})
    thresholds = tuple(cuts) + (ONE,)
    bounds = (r0,) + thresholds
    layers = []
    for i in range(len(thresholds)):
        lower, upper = bounds[i], bounds[i + 1]
        decode = tuple(
            frozenset({k} | {j for j in S if j != k and t.quality(k, j) < upper}) for k in S
        )
        groups = tuple(
            frozenset({k} | {j for j in S if j != k and t.quality(j, k) < upper}) for k in S
        )
        matrix = tuple(tuple(int(j in decode[p]) for j in S) for p in range(len(S)))
        tx_lower = tuple(r[k] if i == 0 else lower for k in S)
        layers.append(Layer(i + 2, lower, upper, tx_lower, decode, groups, matrix))
    return TrsPlan(t, S, r, r0, thresholds, tuple(layers))


@dataclass(frozen=True)
class LayerRow:
    """``sum of d over members <= rhs`` for the decoding user ``user``."""

    user: int
    members: frozenset
    rhs: Fraction


@dataclass(frozen=True)
class LayerConstraintSystem:
    """Private DoF bounds plus one row per active user in every common layer."""

    S: tuple[int, ...]
    private_bounds: tuple[Fraction, ...]
    layers: tuple[tuple[LayerRow, ...], ...]

    def is_feasible(self, private: Sequence[Fraction], common: Sequence[Mapping[int, Fraction]]) -> bool:
        """``private`` is a length-K vector; ``common[i]`` maps users to layer DoF."""
        if any(d < 0 or d > bound for d, bound in zip(private, self.private_bounds)):
            return False
        for rows, alloc in zip(self.layers, common):
            if any(v < 0 for v in alloc.values()):
                return False
            for row in rows:
                if sum((alloc.get(j, ZERO) for j in row.members), ZERO) > row.rhs:
                    return False
        return True


def trs_constraint_systems(plan: TrsPlan, exact: bool = False) -> LayerConstraintSystem:
    """Constraint rows for every layer.

    The lowest common layer's right-hand side is its width ``a_pi(1) - r0``
    (inner bound).  With ``exact=True`` user ``k`` instead gets
    ``a_pi(1) - max(r_k, max_j (r_j - a_kj))``, which is never smaller.
    """
    t = plan.topology
    layers = []
    for layer in plan.layers:
        rows = []
        for p, k in enumerate(plan.S):
            rhs = layer.width
            if exact and layer.index == 2:
                leak = max((plan.r[j] - t.quality(k, j) for j in plan.S if j != k), default=plan.r[k])
                rhs = layer.upper - max(plan.r[k], leak)
            rows.append(LayerRow(k, layer.decode_sets[p], rhs))
        layers.append(tuple(rows))
    return LayerConstraintSystem(plan.S, private_dof(t, plan.S, plan.r), tuple(layers))


def weighted_decomposition(plan: TrsPlan) -> list[tuple[Fraction, tuple[tuple[int, ...], ...]]]:
    """``(layer width, connectivity matrix)`` per layer; widths sum to ``1 - r0``."""
    return [(layer.width, layer.matrix) for layer in plan.layers]


def split_common(plan: TrsPlan, common: Mapping[int, Fraction]) -> list[dict[int, Fraction]]:
    """Spread a rate-splitting common allocation over the layers in proportion to width.

    ``common`` maps active users to per-transmitter common DoF summing to at
    most ``1 - r0``.  Each layer receives the share ``width / (1 - r0)`` of
    every entry, so each layer total stays within that layer's width.
    """
    total = sum((Fraction(v) for v in common.values()), ZERO)
    span = ONE - plan.r0
    if total > span:
        raise ValueError(f"common DoF {format_rational(total)} exceed 1 - r0 = {format_rational(span)}")
    if span == 0:
        return [{k: ZERO for k in common} for _ in plan.layers]
    return [{k: Fraction(v) * layer.width / span for k, v in common.items()} for layer in plan.layers]


def layer_packing(plan: TrsPlan, layer: Layer, mode: str = MAXIMAL) -> Fraction:
    """Normalized sum DoF of a layer: fractional (maximal) or integer (orthogonal) packing."""
    h = plan.hypergraph(layer)
    if mode == MAXIMAL:
        return fractional_packing_number(h)
    if mode == ORTHOGONAL:
        return Fraction(len(maximum_packing(h)))
    raise ValueError(f"unknown groupcasting mode {mode!r}")


def layer_allocation(plan: TrsPlan, layer: Layer, mode: str = MAXIMAL) -> dict[int, Fraction]:
    """Normalized per-message DoF attaining :func:`layer_packing`."""
    h = plan.hypergraph(layer)
    if mode == MAXIMAL:
        return fractional_packing_point(h)
    if mode == ORTHOGONAL:
        chosen = set(maximum_packing(h))
        return {k: ONE if k in chosen else ZERO for k in plan.S}
    raise ValueError(f"unknown groupcasting mode {mode!r}")


@dataclass(frozen=True)
class PlanValue:
    """Sum DoF of a plan with its breakdown."""

    total: Fraction
    private: Fraction
    layer_terms: tuple[tuple[Fraction, Fraction, Fraction], ...]  # (lower, upper, packing)


def plan_sum_dof(plan: TrsPlan, mode: str = MAXIMAL) -> PlanValue:
    """Private sum plus ``width x packing`` for every common layer."""
    priv = sum(private_dof(plan.topology, plan.S, plan.r), ZERO)
    terms = tuple(
        (layer.lower, layer.upper, layer_packing(plan, layer, mode)) for layer in plan.layers
    )
    common = sum(((hi - lo) * p for lo, hi, p in terms), ZERO)
    return PlanValue(priv + common, priv, terms)


def format_plan(plan: TrsPlan) -> str:
    """Human-readable listing: exponents, then one block per layer."""

    def users(xs):
        return "{" + ",".join(str(x + 1) for x in sorted(xs)) + "}"

    priv = private_dof(plan.topology, plan.S, plan.r)
    lines = [
        f"active set: {users(plan.S)}",
        "private exponents: " + " ".join(format_rational(plan.r[k]) for k in range(plan.topology.K)),
        "private DoF: " + " ".join(format_rational(priv[k]) for k in range(plan.topology.K)),
        f"r0: {format_rational(plan.r0)}",
        "thresholds: " + " ".join(format_rational(x) for x in plan.thresholds),
    ]
    for layer in plan.layers:
        lines.append(
            f"layer {layer.index}: exponents [{format_rational(layer.lower)}, {format_rational(layer.upper)}]"
            f" width {format_rational(layer.width)}"
        )
        for p, k in enumerate(plan.S):
            lines.append(
                f"  tx {k + 1}: interval [{format_rational(layer.tx_lower[p])}, {format_rational(layer.upper)}]"
                f" group {users(layer.groups[p])}"
            )
        for p, k in enumerate(plan.S):
            row = " ".join(str(x) for x in layer.matrix[p])
            lines.append(f"  user {k + 1}: decodes {users(layer.decode_sets[p])} row [{row}]")
    return "\n".join(lines) + "\n"
