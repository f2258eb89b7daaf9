"""Exact rational scalars, CSIT quality topologies and their constructors.

Users and transmitters are indexed ``0..K-1`` internally and ``1..K`` in
every user-facing string.  A quality ``a[k][j]`` describes the link from
transmitter ``j`` to user ``k``; direct links carry no quality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    ExponentOutOfRange,
    InvalidActiveSet,
    InvalidOrder,
    MissingDiagonal,
    MissingQuality,
    QualityOnAbsentLink,
    QualityOutOfRange,
    TopologyFormatError,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(value) -> Fraction:
    """Convert ``value`` to a Fraction without passing through binary floats.

    Strings may be ``"p/q"`` or decimals such as ``"0.2"``; floats are
    converted through their shortest decimal representation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    return Fraction(value)


def format_rational(q: Fraction) -> str:
    """Render as ``num/den``, always with an explicit denominator."""
    return f"{q.numerator}/{q.denominator}"


def format_decimal(q: Fraction, places: int = 6) -> str:
    """Round half-even to ``places`` decimals using exact arithmetic."""
    scaled = round(q * 10**places)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**places)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"


@dataclass(frozen=True)
class CsitTopology:
    """Connectivity and CSIT qualities of a K-cell MISO interference channel.

    Attributes
    ----------
    K : int
        Number of transmitter/user pairs.
    connectivity : tuple of tuple of bool
        ``connectivity[k][j]`` is True when transmitter ``j`` reaches user ``k``.
    qualities : tuple of tuple of Fraction or None
        ``qualities[k][j]`` is defined exactly on present interference links.

    Instances are validated on construction, so every CsitTopology in
    circulation satisfies the model invariants.
    """

    K: int
    connectivity: tuple[tuple[bool, ...], ...]
    qualities: tuple[tuple[Fraction | None, ...], ...]

    def __post_init__(self):
        _check_invariants(self.K, self.connectivity, self.qualities)

    def present(self, k: int, j: int) -> bool:
        return self.connectivity[k][j]

    def quality(self, k: int, j: int) -> Fraction:
        """Quality of the link from transmitter ``j`` to user ``k``."""
        q = self.qualities[k][j]
        if q is None:
            raise KeyError(f"link ({k + 1},{j + 1}) carries no quality")
        return q

    def is_fully_connected(self, users: Iterable[int] | None = None) -> bool:
        idx = range(self.K) if users is None else list(users)
        return all(self.connectivity[k][j] for k in idx for j in idx)

    def interference_links(self) -> list[tuple[int, int]]:
        """Present links ``(k, j)`` with ``k != j``, row-major."""
        return [
            (k, j)
            for k in range(self.K)
            for j in range(self.K)
            if k != j and self.connectivity[k][j]
        ]

    def distinct_qualities(self) -> list[Fraction]:
        return sorted({self.quality(k, j) for k, j in self.interference_links()})

    def quality_table(self) -> list[list[Fraction | None]]:
        return [list(row) for row in self.qualities]


def _check_invariants(K, connectivity, qualities):
    if K < 2:
        raise ValueError("a topology needs at least two users")
    if len(connectivity) != K or any(len(row) != K for row in connectivity):
        raise ValueError("connectivity must be a K x K table")
    if len(qualities) != K or any(len(row) != K for row in qualities):
        raise ValueError("qualities must be a K x K table")
    for k in range(K):
        if not connectivity[k][k]:
            raise MissingDiagonal("direct link must be present", (k + 1, k + 1))
    for k in range(K):
        for j in range(K):
            q = qualities[k][j]
            if k == j:
                if q is not None:
                    raise ValueError(f"direct link ({k + 1},{k + 1}) cannot carry a quality")
                continue
            if not connectivity[k][j]:
                if q is not None:
                    raise QualityOnAbsentLink("link is absent", (k + 1, j + 1))
                continue
            if q is None:
                raise MissingQuality("present interference link needs a quality", (k + 1, j + 1))
            if not (ZERO <= q <= ONE):
                raise QualityOutOfRange(f"{format_rational(q)} is outside [0, 1]", (k + 1, j + 1))


def validate_topology(
    K: int,
    connectivity: Sequence[Sequence[int | bool]],
    qualities: Mapping[tuple[int, int], object],
) -> CsitTopology:
    """Build a topology from raw pieces, checking every model invariant.

    Parameters
    ----------
    K : int
        User count, at least 2.
    connectivity : K x K table of 0/1
        Link presence, rows indexed by user.
    qualities : mapping
        ``(k, j) -> value`` with 0-based user ``k`` and transmitter ``j``.
        Values are converted exactly with :func:`as_rational`.
    """
    if K < 2:
        raise ValueError("a topology needs at least two users")
    conn = tuple(tuple(bool(int(x)) for x in row) for row in connectivity)
    if len(conn) != K or any(len(row) != K for row in conn):
        raise ValueError("connectivity must be a K x K table")
    table: list[list[Fraction | None]] = [[None] * K for _ in range(K)]
    for (k, j), value in sorted(qualities.items()):
        if not (0 <= k < K and 0 <= j < K):
            raise ValueError(f"quality index ({k + 1},{j + 1}) outside 1..{K}")
        q = as_rational(value)
        if k == j:
            raise ValueError(f"direct link ({k + 1},{k + 1}) cannot carry a quality")
        if not conn[k][j]:
            raise QualityOnAbsentLink("link is absent", (k + 1, j + 1))
        if not (ZERO <= q <= ONE):
            raise QualityOutOfRange(f"{format_rational(q)} is outside [0, 1]", (k + 1, j + 1))
        table[k][j] = q
    return CsitTopology(K, conn, tuple(tuple(row) for row in table))


def fully_connected_topology(quality_table: Sequence[Sequence[object]]) -> CsitTopology:
    """Topology with every link present; diagonal entries of the table are ignored."""
    K = len(quality_table)
    quals = {
        (k, j): quality_table[k][j] for k in range(K) for j in range(K) if k != j
    }
    return validate_topology(K, [[1] * K for _ in range(K)], quals)


def hierarchical_topology(a, b) -> CsitTopology:
    """Three-user topology where user 1's cross links and links into user 1 have
    quality ``b`` and the links between users 2 and 3 have quality ``a``."""
    a, b = as_rational(a), as_rational(b)
    return fully_connected_topology([[None, b, b], [b, None, a], [b, a, None]])


def _check_order(a: Fraction, b: Fraction):
    if not (ZERO <= a <= ONE and ZERO <= b <= ONE):
        raise QualityOutOfRange(f"a={format_rational(a)}, b={format_rational(b)} must lie in [0, 1]")
    if a > b:
        raise InvalidOrder(f"a={format_rational(a)} exceeds b={format_rational(b)}")


def make_realistic_topology(K: int, a, b, orientation: Sequence[int] | None = None) -> CsitTopology:
    """Each user hears its own transmitter and the two ring neighbours.

    With ``orientation[k] == 0`` user ``k`` sees quality ``a`` from its
    successor ``k+1`` and ``b`` from its predecessor ``k-1``; a 1 swaps the
    two.  All zeros is the cyclic topology.
    """
    a, b = as_rational(a), as_rational(b)
    if K < 3:
        raise ValueError("the three-transmitter class needs K >= 3")
    _check_order(a, b)
    orientation = [0] * K if orientation is None else list(orientation)
    if len(orientation) != K or any(o not in (0, 1) for o in orientation):
        raise ValueError("orientation must be K bits")
    conn = [[0] * K for _ in range(K)]
    quals = {}
    for k in range(K):
        nxt, prv = (k + 1) % K, (k - 1) % K
        conn[k][k] = conn[k][nxt] = conn[k][prv] = 1
        to_next, to_prev = (a, b) if orientation[k] == 0 else (b, a)
        quals[(k, nxt)] = to_next
        quals[(k, prv)] = to_prev
    return validate_topology(K, conn, quals)


def make_cyclic_topology(K: int, a, b) -> CsitTopology:
    """Realistic-class topology with quality ``a`` from the successor and ``b``
    from the predecessor at every user."""
    return make_realistic_topology(K, a, b)


def effective_zfbf_topology(t: CsitTopology) -> CsitTopology:
    """Fully connected copy in which every absent interference link gets quality 1.

    An absent link leaks nothing, which is what perfect CSIT would achieve,
    so the fully connected region machinery applies unchanged.
    """
    K = t.K
    table = [
        [None if k == j else (t.qualities[k][j] if t.connectivity[k][j] else ONE) for j in range(K)]
        for k in range(K)
    ]
    return fully_connected_topology(table)


def rotate_topology(t: CsitTopology, shift: int) -> CsitTopology:
    """Relabel user ``k`` as ``k + shift`` (mod K)."""
    K = t.K
    conn = [[0] * K for _ in range(K)]
    quals = {}
    for k in range(K):
        for j in range(K):
            kk, jj = (k + shift) % K, (j + shift) % K
            conn[kk][jj] = int(t.connectivity[k][j])
            if t.qualities[k][j] is not None:
                quals[(kk, jj)] = t.qualities[k][j]
    return validate_topology(K, conn, quals)


def power_policy(r: Sequence[object], K: int | None = None) -> tuple[Fraction, ...]:
    """Validate a vector of private power exponents, each in [0, 1].

    Users that stay silent carry exponent 0 rather than minus infinity; the
    two are equivalent in terms of DoF and 0 keeps the arithmetic finite.
    """
    values = tuple(as_rational(x) for x in r)
    if K is not None and len(values) != K:
        raise ValueError(f"power policy needs {K} entries, got {len(values)}")
    for k, x in enumerate(values):
        if not (ZERO <= x <= ONE):
            raise ExponentOutOfRange(f"{format_rational(x)} is outside [0, 1]", (k + 1,))
    return values


def active_set(users: Iterable[int], K: int) -> tuple[int, ...]:
    """Sorted, deduplicated 0-based active set; must be nonempty and within range."""
    S = tuple(sorted(set(users)))
    if not S:
        raise InvalidActiveSet("active set must be nonempty")
    bad = [k for k in S if not 0 <= k < K]
    if bad:
        raise InvalidActiveSet(f"users {[k + 1 for k in bad]} outside 1..{K}")
    return S


def parse_user_list(text: str, K: int) -> tuple[int, ...]:
    """Parse a comma separated 1-based user list such as ``"2,3"``."""
    try:
        users = [int(tok) - 1 for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InvalidActiveSet(f"cannot parse user list {text!r}") from exc
    return active_set(users, K)


# --- text format -----------------------------------------------------------

def topology_to_dict(t: CsitTopology) -> dict:
    """Serializable form; see :func:`parse_topology` for the grammar."""
    return {
        "K": t.K,
        "connectivity": ["".join("1" if x else "0" for x in row) for row in t.connectivity],
        "qualities": [
            {"rx": k + 1, "tx": j + 1, "num": q.numerator, "den": q.denominator}
            for k, j in t.interference_links()
            for q in [t.quality(k, j)]
        ],
    }


def format_topology(t: CsitTopology) -> str:
    return json.dumps(topology_to_dict(t), indent=2) + "\n"


def _parse_bits(row, K, k):
    if isinstance(row, str):
        bits = [c for c in row if not c.isspace()]
    else:
        bits = list(row)
    if len(bits) != K or any(str(b) not in ("0", "1") for b in bits):
        raise TopologyFormatError(f"connectivity row must hold {K} bits", (k + 1,))
    return [int(str(b)) for b in bits]


def topology_from_dict(doc: Mapping) -> CsitTopology:
    try:
        K = doc["K"]
        rows = doc["connectivity"]
        records = doc.get("qualities", [])
    except (KeyError, TypeError, AttributeError) as exc:
        raise TopologyFormatError(f"missing field {exc}") from exc
    if not isinstance(K, int) or isinstance(K, bool) or K < 2:
        raise TopologyFormatError("K must be an integer >= 2")
    if not isinstance(rows, list) or len(rows) != K:
        raise TopologyFormatError(f"connectivity must list {K} rows")
    conn = [_parse_bits(row, K, k) for k, row in enumerate(rows)]
    quals = {}
    for rec in records:
        try:
            rx, tx, num, den = (rec[f] for f in ("rx", "tx", "num", "den"))
        except (KeyError, TypeError) as exc:
            raise TopologyFormatError(f"quality record {rec!r} lacks rx/tx/num/den") from exc
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (rx, tx, num, den)):
            raise TopologyFormatError(f"quality record {rec!r} must hold integers")
        if den <= 0:
            raise TopologyFormatError("denominator must be positive", (rx, tx))
        if not (1 <= rx <= K and 1 <= tx <= K):
            raise TopologyFormatError(f"indices outside 1..{K}", (rx, tx))
        if rx == tx:
            raise TopologyFormatError("direct links carry no quality", (rx, tx))
        if (rx - 1, tx - 1) in quals:
            raise TopologyFormatError("duplicate quality record", (rx, tx))
        quals[(rx - 1, tx - 1)] = Fraction(num, den)
    return validate_topology(K, conn, quals)


def parse_topology(text: str) -> CsitTopology:
    """Parse the JSON topology document.

    The document is an object with three fields::

        {"K": 3,
         "connectivity": ["111", "111", "111"],
         "qualities": [{"rx": 1, "tx": 2, "num": 4, "den": 5}, ...]}

    ``connectivity`` rows are strings of K bits (whitespace ignored) or
    lists of 0/1 integers; row ``k`` lists the transmitters heard by user
    ``k``.  ``qualities`` holds one record per present interference link;
    absent links and direct links are omitted.  Indices are 1-based.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyFormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    return topology_from_dict(doc)


def load_topology(path) -> CsitTopology:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read())


def save_topology(t: CsitTopology, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_topology(t))
