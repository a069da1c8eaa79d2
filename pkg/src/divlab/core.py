"""Finite diversities with exact rational tables.

A finite diversity assigns a nonnegative rational to every subset of a
ground set, is zero exactly on subsets of size <= 1, and satisfies the
triangle-like axiom: delta(A|B) + delta(B|C) >= delta(A|C) for nonempty B.
Tables are stored densely, indexed by subset bitmask.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .errors import CapExceeded, EmptySubset, StructuralError
from .subsets import format_key, iter_indices, mask_of, popcount, submasks

# Ground sets larger than this are refused outright; tables and most checks
# are exponential in n.
HARD_CAP = 16

ZERO = Fraction(0)

# Denominator lcm up to which hot loops switch to scaled-integer arithmetic.
_SCALE_LIMIT = 1 << 48


@dataclass(frozen=True)
class Violation:
    rule: str
    subsets: tuple[tuple[str, ...], ...]
    lhs: Fraction
    rhs: Fraction

    def describe(self) -> str:
        parts = ", ".join("{" + " ".join(s) + "}" for s in self.subsets)
        return f"{self.rule}: sets {parts}: {self.lhs} vs {self.rhs}"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return self.ok


def _check_labels(points: Sequence[str]) -> None:
    seen = set()
    for label in points:
        if not label or label != "".join(label.split()):
            raise StructuralError(f"bad point label {label!r}: empty or contains whitespace")
        if label in seen:
            raise StructuralError(f"duplicate point label {label!r}")
        seen.add(label)


@dataclass(frozen=True)
class FiniteDiversity:
    """Ground set plus the full value table, indexed by subset bitmask.

    Entries for the empty set and singletons must be zero; all entries must
    be nonnegative rationals.  Construction checks structure only; run
    :func:`validate` to check the diversity axioms.
    """

    points: tuple[str, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.points)
        if n == 0:
            raise StructuralError("ground set must be nonempty")
        if n > HARD_CAP:
            raise CapExceeded(f"ground set of {n} points exceeds the hard cap {HARD_CAP}")
        _check_labels(self.points)
        if len(self.values) != 1 << n:
            raise StructuralError(
                f"table has {len(self.values)} entries, expected {1 << n}"
            )
        for mask, v in enumerate(self.values):
            if not isinstance(v, Fraction):
                raise StructuralError(f"table entry for mask {mask} is not a rational")
            if v < 0:
                raise StructuralError(
                    f"negative value {v} on subset {{{format_key(mask, self.points)}}}"
                )
            if popcount(mask) <= 1 and v != 0:
                raise StructuralError(
                    f"subset {{{format_key(mask, self.points)}}} of size <= 1 must have value 0"
                )

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def value(self, mask: int) -> Fraction:
        return self.values[mask]

    def index_of(self) -> dict:
        return {label: i for i, label in enumerate(self.points)}

    def label_mask(self, labels) -> int:
        idx = self.index_of()
        return mask_of(idx[l] for l in labels)

    def subset_labels(self, mask: int) -> tuple[str, ...]:
        return tuple(self.points[i] for i in iter_indices(mask))

    def pair_value(self, i: int, j: int) -> Fraction:
        return self.values[(1 << i) | (1 << j)]


@dataclass(frozen=True)
class MetricSpace:
    """Symmetric exact-rational distance matrix with zero diagonal.

    Construction verifies positivity off the diagonal and the triangle
    inequality, so an instance is always a genuine metric.
    """

    points: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.points)
        if n == 0:
            raise StructuralError("metric space must be nonempty")
        if n > HARD_CAP:
            raise CapExceeded(f"{n} points exceeds the hard cap {HARD_CAP}")
        _check_labels(self.points)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise StructuralError("distance matrix shape does not match the point list")
        d = self.dist
        for i in range(n):
            if d[i][i] != 0:
                raise StructuralError(f"nonzero diagonal at {self.points[i]}")
            for j in range(i + 1, n):
                if d[i][j] != d[j][i]:
                    raise StructuralError(
                        f"asymmetric distances for {self.points[i]}, {self.points[j]}"
                    )
                if d[i][j] <= 0:
                    raise StructuralError(
                        f"non-positive distance between {self.points[i]} and {self.points[j]}"
                    )
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if d[i][k] > d[i][j] + d[j][k]:
                        raise StructuralError(
                            "triangle inequality fails on "
                            f"({self.points[i]}, {self.points[j]}, {self.points[k]})"
                        )

    @property
    def n(self) -> int:
        return len(self.points)

    def d(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]


def _numeric_table(values: Sequence[Fraction]):
    """Values as plain ints scaled by a common denominator when that is
    cheap, else the Fractions themselves.  Order relations are preserved."""
    denom = 1
    for v in values:
        denom = lcm(denom, v.denominator)
        if denom > _SCALE_LIMIT:
            return list(values)
    return [int(v * denom) for v in values]


def _generic_labels(n: int) -> tuple[str, ...]:
    return tuple(f"p{i}" for i in range(n))


def table_report(
    values: Sequence[Fraction],
    n: int,
    *,
    points: Sequence[str] | None = None,
    method: str = "reduced",
    stop_at_first: bool = False,
) -> ValidationReport:
    """Check whether a raw full table (2**n entries, empty set included)
    defines a diversity.

    ``reduced`` checks the zero/positivity rule, monotonicity over single
    additions, and subadditivity on pairs meeting in exactly one point.
    Pairs with larger overlaps follow by deleting shared points, so this is
    equivalent to the full triangle axiom.  ``naive`` enumerates every
    (A, B, C) triple with B nonempty and is kept as the oracle.
    """
    if method not in ("reduced", "naive"):
        raise ValueError(f"unknown validation method {method!r}")
    if len(values) != 1 << n:
        raise StructuralError(f"table has {len(values)} entries, expected {1 << n}")
    pts = tuple(points) if points is not None else _generic_labels(n)
    full = 1 << n
    vals = _numeric_table(values)
    violations: list[Violation] = []

    def report(rule, masks, lhs, rhs):
        violations.append(
            Violation(
                rule,
                tuple(tuple(pts[i] for i in iter_indices(m)) for m in masks),
                lhs,
                rhs,
            )
        )

    # D1: zero exactly on subsets of size <= 1, nonnegative everywhere.
    for mask in range(full):
        v = vals[mask]
        size = popcount(mask)
        if v < 0:
            report("nonnegative", (mask,), values[mask], ZERO)
        elif size <= 1 and v != 0:
            report("D1", (mask,), values[mask], ZERO)
        elif size >= 2 and v == 0:
            report("D1", (mask,), values[mask], ZERO)
        if violations and stop_at_first:
            return ValidationReport(False, tuple(violations))

    if method == "naive":
        for b in range(1, full):
            for a in range(full):
                ab = vals[a | b]
                for c in range(full):
                    if ab + vals[b | c] < vals[a | c]:
                        report(
                            "D2",
                            (a, b, c),
                            values[a | b] + values[b | c],
                            values[a | c],
                        )
                        if stop_at_first:
                            return ValidationReport(False, tuple(violations))
        return ValidationReport(not violations, tuple(violations))

    # Monotonicity over single additions.
    for mask in range(full):
        v = vals[mask]
        rest = ~mask & (full - 1)
        for y in iter_indices(rest):
            if v > vals[mask | (1 << y)]:
                report("monotone", (mask, mask | (1 << y)), values[mask], values[mask | (1 << y)])
                if stop_at_first:
                    return ValidationReport(False, tuple(violations))

    # Subadditivity on pairs whose intersection is exactly one point.
    # Pairs with larger overlaps follow by deleting shared points from one
    # side (monotonicity), so this generator set is complete.
    for x in range(n):
        bit = 1 << x
        rest = (full - 1) ^ bit
        for a in submasks(rest):
            if a == 0:
                continue
            va = vals[a | bit]
            other = rest ^ a
            for b in submasks(other):
                if b == 0 or b > a:
                    continue
                if vals[a | b | bit] > va + vals[b | bit]:
                    report(
                        "subadditive-overlap",
                        (a | bit, b | bit),
                        values[a | bit] + values[b | bit],
                        values[a | b | bit],
                    )
                    if stop_at_first:
                        return ValidationReport(False, tuple(violations))

    return ValidationReport(not violations, tuple(violations))


def validate(D: FiniteDiversity, *, method: str = "reduced", stop_at_first: bool = False) -> ValidationReport:
    """Check the diversity axioms on a structurally well-formed table."""
    return table_report(
        D.values, D.n, points=D.points, method=method, stop_at_first=stop_at_first
    )


def induced_metric(D: FiniteDiversity) -> MetricSpace:
    """The metric d(a, b) = delta({a, b}).  Raises if D is not valid enough
    for the pair values to form a metric."""
    n = D.n
    rows = tuple(
        tuple(ZERO if i == j else D.pair_value(i, j) for j in range(n)) for i in range(n)
    )
    return MetricSpace(D.points, rows)


def restrict(D: FiniteDiversity, subset: int) -> FiniteDiversity:
    """The sub-diversity on the points in ``subset`` (a mask on D)."""
    if subset == 0:
        raise EmptySubset("cannot restrict to the empty set")
    if subset > D.full_mask:
        raise StructuralError("restriction mask has bits outside the ground set")
    sel = list(iter_indices(subset))
    points = tuple(D.points[i] for i in sel)
    k = len(sel)
    values = []
    for new_mask in range(1 << k):
        old = 0
        m = new_mask
        for pos, i in enumerate(sel):
            if m & (1 << pos):
                old |= 1 << i
        values.append(D.values[old])
    return FiniteDiversity(points, tuple(values))


def lipschitz_check(D: FiniteDiversity) -> ValidationReport:
    """Verify that swapping one member of a subset moves the value by at
    most the distance between the swapped points.

    Any valid diversity passes; this is a redundant cross-check used by
    test suites.
    """
    n = D.n
    full = D.full_mask
    vals = _numeric_table(D.values)
    violations: list[Violation] = []
    for mask in range(1, full + 1):
        v = vals[mask]
        for x in iter_indices(mask):
            bx = 1 << x
            for y in range(n):
                if y == x:
                    continue
                by = 1 << y
                swapped = (mask ^ bx) | by
                gap = v - vals[swapped]
                if gap < 0:
                    gap = -gap
                if gap > vals[bx | by]:
                    violations.append(
                        Violation(
                            "lipschitz",
                            (D.subset_labels(mask), D.subset_labels(swapped), (D.points[x], D.points[y])),
                            abs(D.values[mask] - D.values[swapped]),
                            D.values[bx | by],
                        )
                    )
    return ValidationReport(not violations, tuple(violations))
