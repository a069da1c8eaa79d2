"""One-point extensions of finite diversities.

An admissible function over (X, delta) is a table f on all subsets of X
that can serve as the trace of a new point z: setting
delta(A | {z}) = f(A) yields a diversity again.  The four defining
conditions are

  (i)   f({}) = 0,
  (ii)  f(A) >= delta(A),
  (iii) f(A|C) + delta(B|C) >= f(A|B)   for nonempty C,
  (iv)  f(A) + f(B) >= f(A|B).

This module provides the condition checker, the canonical embedding
``kappa``, the extension value ``hat_delta`` on finite families of
admissible functions, maximal extensions from a support, and one-point
amalgamation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import inf, lcm
from typing import Sequence

from .core import (
    FiniteDiversity,
    ValidationReport,
    Violation,
    ZERO,
    _SCALE_LIMIT,
    restrict,
    table_report,
)
from .errors import (
    DuplicateLabel,
    EmptySupport,
    MixedBase,
    NotAdmissible,
    StructuralError,
)
from .subsets import iter_indices, submasks


@dataclass(frozen=True)
class AdmissibleFunction:
    """Candidate one-point extension table over a base diversity.

    Stores the full table (empty set included) even when a support is
    declared; the support is a verified claim, not a compression.
    Construction checks structure only; use :func:`is_admissible` to check
    the extension conditions.
    """

    base: FiniteDiversity
    values: tuple[Fraction, ...]
    support: int | None = None

    def __post_init__(self):
        if len(self.values) != 1 << self.base.n:
            raise StructuralError(
                f"function table has {len(self.values)} entries, expected {1 << self.base.n}"
            )
        if self.values[0] != 0:
            raise StructuralError("extension table must be zero on the empty set")
        for v in self.values:
            if not isinstance(v, Fraction):
                raise StructuralError("extension table entries must be rationals")
            if v < 0:
                raise StructuralError("extension table entries must be nonnegative")
        if self.support is not None:
            if self.support == 0:
                raise EmptySupport("declared support must be nonempty")
            if self.support > self.base.full_mask:
                raise StructuralError("declared support has bits outside the base")

    @property
    def n(self) -> int:
        return self.base.n

    def value(self, mask: int) -> Fraction:
        return self.values[mask]

    def restricted(self, subset: int) -> AdmissibleFunction:
        """The function viewed over the sub-diversity on ``subset``."""
        sub_base = restrict(self.base, subset)
        sel = list(iter_indices(subset))
        vals = []
        for new_mask in range(1 << len(sel)):
            old = 0
            for pos, i in enumerate(sel):
                if new_mask & (1 << pos):
                    old |= 1 << i
            vals.append(self.values[old])
        return AdmissibleFunction(sub_base, tuple(vals))


@dataclass(frozen=True)
class Identified:
    """Amalgamation outcome: the new point coincides with an existing one."""

    point: str


def _joint_numeric(tables: Sequence[Sequence[Fraction]]):
    """Scale several tables by one common denominator when cheap.

    Returns (tables, scale); scale is None when the originals are kept.
    """
    denom = 1
    for t in tables:
        for v in t:
            denom = lcm(denom, v.denominator)
            if denom > _SCALE_LIMIT:
                return [list(t) for t in tables], None
    return [[int(v * denom) for v in t] for t in tables], denom


def is_admissible(
    D: FiniteDiversity,
    table: Sequence[Fraction],
    *,
    method: str = "direct",
    stop_at_first: bool = False,
) -> ValidationReport:
    """Check the four extension conditions on a candidate table.

    ``direct`` enumerates the conditions themselves.  ``amalgamation`` is
    the oracle route: build the one-point amalgam table and validate it as
    a diversity (identifying the new point with an existing one when some
    singleton value is zero).
    """
    if len(table) != 1 << D.n:
        raise StructuralError(f"candidate table has {len(table)} entries, expected {1 << D.n}")
    if method == "amalgamation":
        return _is_admissible_oracle(D, table, stop_at_first=stop_at_first)
    if method != "direct":
        raise ValueError(f"unknown admissibility method {method!r}")

    n = D.n
    full = 1 << n
    (fv, dv), _scale = _joint_numeric([table, D.values])
    violations: list[Violation] = []

    def report(rule, masks, lhs, rhs):
        violations.append(
            Violation(rule, tuple(D.subset_labels(m) for m in masks), lhs, rhs)
        )

    # (i)
    if fv[0] != 0:
        report("ext-zero", (0,), table[0], ZERO)
        if stop_at_first:
            return ValidationReport(False, tuple(violations))
    # (ii)
    for a in range(full):
        if fv[a] < dv[a]:
            report("ext-dominates", (a,), table[a], D.values[a])
            if stop_at_first:
                return ValidationReport(False, tuple(violations))
    # (iv)
    for a in range(full):
        fa = fv[a]
        for b in range(a, full):
            if fa + fv[b] < fv[a | b]:
                report("ext-subadditive", (a, b), table[a] + table[b], table[a | b])
                if stop_at_first:
                    return ValidationReport(False, tuple(violations))
    # (iii)
    for c in range(1, full):
        for a in range(full):
            fac = fv[a | c]
            for b in range(full):
                if fac + dv[b | c] < fv[a | b]:
                    report(
                        "ext-triangle",
                        (a, b, c),
                        table[a | c] + D.values[b | c],
                        table[a | b],
                    )
                    if stop_at_first:
                        return ValidationReport(False, tuple(violations))

    return ValidationReport(not violations, tuple(violations))


def _is_admissible_oracle(
    D: FiniteDiversity, table: Sequence[Fraction], *, stop_at_first: bool, validate_method: str = "naive"
) -> ValidationReport:
    if table[0] != 0:
        return ValidationReport(
            False,
            (Violation("ext-zero", ((),), table[0], ZERO),),
        )
    zero_singletons = [x for x in range(D.n) if table[1 << x] == 0]
    if zero_singletons:
        # The new point coincides with x, so the table must equal kappa_x.
        x = zero_singletons[0]
        expected = kappa(D, x).values
        mismatches = tuple(
            Violation("identified-mismatch", (D.subset_labels(a), (D.points[x],)), table[a], expected[a])
            for a in range(1 << D.n)
            if table[a] != expected[a]
        )
        return ValidationReport(not mismatches, mismatches)
    amalgam = _amalgam_table(D, table)
    return table_report(
        amalgam, D.n + 1, points=D.points + ("*",), method=validate_method, stop_at_first=stop_at_first
    )


def admissible_quick(D: FiniteDiversity, table: Sequence[Fraction]) -> bool:
    """Fast yes/no admissibility via the amalgam table and the reduced
    diversity check.  Equivalent to the direct conditions."""
    if table[0] != 0:
        return False
    zero_singletons = [x for x in range(D.n) if table[1 << x] == 0]
    if zero_singletons:
        return tuple(table) == kappa(D, zero_singletons[0]).values
    amalgam = _amalgam_table(D, table)
    return table_report(amalgam, D.n + 1, method="reduced", stop_at_first=True).ok


def _amalgam_table(D: FiniteDiversity, table: Sequence[Fraction]) -> list[Fraction]:
    """Raw full table on X | {z} with delta(A | {z}) = table[A]."""
    n = D.n
    zbit = 1 << n
    out = []
    for mask in range(1 << (n + 1)):
        if mask & zbit:
            out.append(table[mask ^ zbit])
        else:
            out.append(D.values[mask])
    return out


def kappa(D: FiniteDiversity, x: int) -> AdmissibleFunction:
    """The canonical embedding of point ``x``: A -> delta(A | {x})."""
    if not 0 <= x < D.n:
        raise StructuralError(f"point index {x} out of range")
    bit = 1 << x
    vals = tuple(D.values[a | bit] for a in range(1 << D.n))
    return AdmissibleFunction(D, vals, support=bit)


def _check_family(members: Sequence[AdmissibleFunction]) -> FiniteDiversity:
    base = members[0].base
    for f in members[1:]:
        if f.base != base:
            raise MixedBase("family members must share one base diversity")
    return base


def hat_delta(members: Sequence[AdmissibleFunction], *, method: str = "assignment") -> Fraction:
    """Extension-diversity value of a finite family of admissible functions.

    The value is the largest shortfall, over all choices of a pivot j and
    subsets fed to the other members, of f_j applied to the union minus the
    sum the other members charge for their parts.  Families of size <= 1
    have value 0.

    ``assignment`` enumerates the union and optimally assigns its elements
    to the non-pivot members (admissible functions are monotone, so
    partitions dominate covers).  ``naive`` enumerates all subset tuples
    and is the oracle.
    """
    k = len(members)
    if k <= 1:
        return ZERO
    base = _check_family(members)
    full = 1 << base.n
    if method == "naive":
        best = ZERO
        for j in range(k):
            others = [m for i, m in enumerate(members) if i != j]
            fj = members[j].values
            for parts in itertools.product(range(full), repeat=k - 1):
                union = 0
                total = ZERO
                for f, a in zip(others, parts):
                    union |= a
                    total += f.values[a]
                gap = fj[union] - total
                if gap > best:
                    best = gap
        return best
    if method != "assignment":
        raise ValueError(f"unknown hat_delta method {method!r}")

    tables, scale = _joint_numeric([m.values for m in members])
    best = 0 if scale else ZERO
    for j in range(k):
        fj = tables[j]
        # dp[U] = cheapest way to split U among the non-pivot members.
        dp = [0] + [inf] * (full - 1)
        for i in range(k):
            if i == j:
                continue
            fi = tables[i]
            ndp = [None] * full
            for mask in range(full):
                cur = dp[mask]  # give member i nothing
                sub = mask
                while sub:
                    cand = dp[mask ^ sub] + fi[sub]
                    if cand < cur:
                        cur = cand
                    sub = (sub - 1) & mask
                ndp[mask] = cur
            dp = ndp
        for mask in range(full):
            gap = fj[mask] - dp[mask]
            if gap > best:
                best = gap
    return Fraction(best, scale) if scale else best


def hat_delta_pair(f: AdmissibleFunction, g: AdmissibleFunction) -> Fraction:
    """Two-member special case: the sup-norm gap max_B |f(B) - g(B)|."""
    _check_family([f, g])
    return max(abs(a - b) for a, b in zip(f.values, g.values))


def extend_from_support(
    D: FiniteDiversity,
    subset: int,
    f: AdmissibleFunction,
    *,
    method: str = "assignment",
) -> AdmissibleFunction:
    """Maximal admissible extension to all of D of a function on a sub-diversity.

    ``f`` must be admissible over ``restrict(D, subset)``.  The value at A
    is the cheapest way to buy a subset B of the support from f and attach
    every element of A to some member of B:

        min over nonempty B, assignments A -> B of
            f(B) + sum_b delta(part_b | {b}).

    The result agrees with f on subsets of the support, has the support as
    a verified support, and dominates every admissible extension of f.
    """
    if subset == 0:
        raise EmptySupport("support must be nonempty")
    if subset > D.full_mask:
        raise StructuralError("support mask has bits outside the ground set")
    sub_base = restrict(D, subset)
    if f.base != sub_base:
        raise StructuralError("function base does not match the restricted diversity")
    if not admissible_quick(sub_base, f.values):
        raise NotAdmissible("function is not admissible on its support")

    sel = list(iter_indices(subset))
    if method == "covers":
        values = _extend_covers(D, sel, f)
    elif method == "assignment":
        values = _extend_assignment(D, sel, f)
    else:
        raise ValueError(f"unknown extension method {method!r}")
    return AdmissibleFunction(D, tuple(values), support=subset)


def _extend_assignment(D: FiniteDiversity, sel: list[int], f: AdmissibleFunction) -> list[Fraction]:
    n = D.n
    full = 1 << n
    k = len(sel)
    (dv, fv), scale = _joint_numeric([D.values, f.values])

    # attach[b][T] = delta(T | {b}), for each support member b.
    attach = []
    for i in sel:
        bit = 1 << i
        attach.append([dv[t | bit] for t in range(full)])

    # cost[B] = cheapest assignment table for support selection B (k-mask).
    cost: dict[int, list] = {}
    for bmask in range(1, 1 << k):
        low = bmask & -bmask
        lowpos = low.bit_length() - 1
        prev = cost.get(bmask ^ low)
        tab = attach[lowpos]
        if prev is None:
            cost[bmask] = tab
            continue
        merged = [None] * full
        for mask in range(full):
            cur = prev[mask] + tab[0]
            sub = mask
            while sub:
                cand = prev[mask ^ sub] + tab[sub]
                if cand < cur:
                    cur = cand
                sub = (sub - 1) & mask
            merged[mask] = cur
        cost[bmask] = merged

    out = [None] * full
    out[0] = 0
    for mask in range(1, full):
        best = None
        for bmask in range(1, 1 << k):
            cand = fv[bmask] + cost[bmask][mask]
            if best is None or cand < best:
                best = cand
        out[mask] = best
    if scale:
        return [Fraction(v, scale) for v in out]
    return [v if isinstance(v, Fraction) else ZERO for v in out]


def _extend_covers(D: FiniteDiversity, sel: list[int], f: AdmissibleFunction) -> list[Fraction]:
    """Literal enumeration over all covers of A by support-indexed parts.

    Exponential in several directions at once; kept as the slow oracle for
    small ground sets.
    """
    n = D.n
    full = 1 << n
    k = len(sel)
    out = [ZERO] * full
    for A in range(1, full):
        best = None
        subs_of_A = list(submasks(A))
        for bmask in range(1, 1 << k):
            members = [sel[i] for i in iter_indices(bmask)]
            base_cost = f.values[bmask]

            def walk(pos, covered, acc):
                nonlocal best
                if best is not None and acc >= best:
                    return
                if pos == len(members) - 1:
                    need = A ^ covered
                    b = members[pos]
                    for part in subs_of_A:
                        if part & need == need:
                            total = acc + D.values[part | (1 << b)]
                            if best is None or total < best:
                                best = total
                    return
                b = members[pos]
                for part in subs_of_A:
                    walk(pos + 1, covered | part, acc + D.values[part | (1 << b)])

            walk(0, 0, base_cost)
        out[A] = best
    return out


def has_support(D: FiniteDiversity, g: AdmissibleFunction, subset: int) -> bool:
    """True iff g is exactly the maximal extension of its own restriction
    to ``subset``."""
    if subset == 0:
        raise EmptySupport("support must be nonempty")
    if g.base != D:
        raise MixedBase("function is not over this diversity")
    lifted = extend_from_support(D, subset, g.restricted(subset))
    return lifted.values == g.values


def amalgamate(
    D: FiniteDiversity,
    f: AdmissibleFunction,
    label: str,
    *,
    check: bool = True,
) -> FiniteDiversity | Identified:
    """Adjoin one fresh point realizing ``f``.

    If f vanishes on some singleton the new point would coincide with an
    existing one; no fresh point is created and an :class:`Identified`
    outcome names it instead.  With ``check=True`` the candidate is
    verified and ``NotAdmissible`` raised on failure; factories whose
    output is admissible by construction may pass ``check=False``.
    """
    if f.base != D:
        raise MixedBase("function is not over this diversity")
    if label in D.points:
        raise DuplicateLabel(f"label {label!r} already names a point")
    for x in range(D.n):
        if f.values[1 << x] == 0:
            if check and not admissible_quick(D, f.values):
                raise NotAdmissible("table is not admissible")
            return Identified(D.points[x])
    table = _amalgam_table(D, f.values)
    if check:
        report = table_report(table, D.n + 1, points=D.points + (label,), stop_at_first=True)
        if not report.ok:
            raise NotAdmissible(
                f"table is not admissible: {report.violations[0].describe()}",
                report=report,
            )
    return FiniteDiversity(D.points + (label,), tuple(table))
