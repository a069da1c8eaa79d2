"""Realization queries, partial isomorphisms, and back-and-forth search.

A point x of a host diversity realizes a candidate extension table f over a
finite subset F when delta(A | {x}) matches f(A) on every A inside F, up to
a requested slack.  Isomorphism and embedding search extend partial point
maps one point at a time, backtracking over candidates; finite hosts force
backtracking even though spaces with the full extension property never
need it.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import FiniteDiversity, ZERO, restrict
from .errors import (
    DistortionTooLarge,
    EmptySubset,
    InvalidPartialIso,
    StructuralError,
)
from .extension import AdmissibleFunction
from .subsets import (
    descending_cardinality_order,
    is_superset_first,
    iter_indices,
    mask_of,
)


@dataclass(frozen=True)
class PartialIsomorphism:
    """Injective partial point map preserving every subset value on its domain."""

    source: FiniteDiversity
    target: FiniteDiversity
    pairs: tuple[tuple[int, int], ...]

    def domain_mask(self) -> int:
        return mask_of(x for x, _ in self.pairs)

    def range_mask(self) -> int:
        return mask_of(y for _, y in self.pairs)

    def mapping(self) -> dict:
        return dict(self.pairs)

    def is_total(self) -> bool:
        return len(self.pairs) == self.source.n

    def verify(self) -> bool:
        xs = [x for x, _ in self.pairs]
        ys = [y for _, y in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            return False
        if any(not 0 <= x < self.source.n for x in xs):
            return False
        if any(not 0 <= y < self.target.n for y in ys):
            return False
        m = len(self.pairs)
        for combo in range(1 << m):
            smask = 0
            tmask = 0
            for i in range(m):
                if combo & (1 << i):
                    smask |= 1 << xs[i]
                    tmask |= 1 << ys[i]
            if self.source.values[smask] != self.target.values[tmask]:
                return False
        return True


@dataclass(frozen=True)
class RealizationQuery:
    """Ask whether some host point realizes ``func`` over the subset ``subset``
    within slack ``epsilon``."""

    host: FiniteDiversity
    subset: int
    func: AdmissibleFunction
    epsilon: Fraction = ZERO

    def __post_init__(self):
        if self.subset == 0:
            raise EmptySubset("query subset must be nonempty")
        if self.subset > self.host.full_mask:
            raise StructuralError("query subset has bits outside the host")
        if self.func.base != restrict(self.host, self.subset):
            raise StructuralError("query function is not over the restricted host")
        if self.epsilon < 0:
            raise StructuralError("epsilon must be nonnegative")


def realization_error(host: FiniteDiversity, subset: int, func: AdmissibleFunction, x: int) -> Fraction:
    """Worst absolute mismatch of point x against the candidate table."""
    sel = list(iter_indices(subset))
    xbit = 1 << x
    worst = ZERO
    for fmask in range(1 << len(sel)):
        hmask = 0
        for pos, i in enumerate(sel):
            if fmask & (1 << pos):
                hmask |= 1 << i
        gap = abs(host.values[hmask | xbit] - func.values[fmask])
        if gap > worst:
            worst = gap
    return worst


def best_realizer(host: FiniteDiversity, subset: int, func: AdmissibleFunction) -> tuple[int, Fraction]:
    """The host point with the smallest worst-case mismatch (lowest index on
    ties) and that mismatch."""
    best_x = 0
    best_err = None
    for x in range(host.n):
        err = realization_error(host, subset, func, x)
        if best_err is None or err < best_err:
            best_x, best_err = x, err
    return best_x, best_err


def realize(query: RealizationQuery) -> Optional[int]:
    """Index of a realizing host point within the query's slack, or None."""
    x, err = best_realizer(query.host, query.subset, query.func)
    return x if err <= query.epsilon else None


def extension_deficit(D: FiniteDiversity, queries: Sequence[RealizationQuery]) -> Fraction:
    """How far D is from realizing every query exactly: the worst, over the
    queries, of the best achievable mismatch."""
    worst = ZERO
    for q in queries:
        if q.host != D:
            raise StructuralError("query does not target this diversity")
        _, err = best_realizer(D, q.subset, q.func)
        if err > worst:
            worst = err
    return worst


def extend_partial_isomorphism(phi: PartialIsomorphism, x: int) -> Optional[PartialIsomorphism]:
    """Extend by the source point x, choosing the lowest-index target point
    whose values against the current range match x against the domain."""
    if not phi.verify():
        raise InvalidPartialIso("partial map does not preserve subset values")
    if any(x == sx for sx, _ in phi.pairs):
        raise StructuralError(f"source point {x} is already mapped")
    if not 0 <= x < phi.source.n:
        raise StructuralError(f"source point index {x} out of range")
    used = {y for _, y in phi.pairs}
    for y in range(phi.target.n):
        if y in used:
            continue
        if _pair_consistent(phi.source, phi.target, phi.pairs, x, y):
            return PartialIsomorphism(phi.source, phi.target, phi.pairs + ((x, y),))
    return None


def _pair_consistent(
    src: FiniteDiversity,
    tgt: FiniteDiversity,
    pairs: Sequence[tuple[int, int]],
    x: int,
    y: int,
) -> bool:
    m = len(pairs)
    xbit = 1 << x
    ybit = 1 << y
    for combo in range(1 << m):
        smask = xbit
        tmask = ybit
        for i in range(m):
            if combo & (1 << i):
                smask |= 1 << pairs[i][0]
                tmask |= 1 << pairs[i][1]
        if src.values[smask] != tgt.values[tmask]:
            return False
    return True


def _distance_signature(D: FiniteDiversity, x: int) -> tuple:
    return tuple(sorted(D.pair_value(x, y) for y in range(D.n) if y != x))


def find_isomorphism(
    D1: FiniteDiversity, D2: FiniteDiversity, *, prune: bool = True
) -> Optional[PartialIsomorphism]:
    """Total diversity isomorphism via alternating one-point extensions with
    backtracking, or None.

    Candidates are filtered by sorted distance multisets per point when
    ``prune`` is set; the unpruned search is kept for differential testing.
    """
    n = D1.n
    if n != D2.n:
        return None
    if prune:
        # Any isomorphism maps subsets bijectively, so the value multisets
        # and the per-point distance multisets must agree.
        if sorted(D1.values) != sorted(D2.values):
            return None
        sig1 = [_distance_signature(D1, x) for x in range(n)]
        sig2 = [_distance_signature(D2, y) for y in range(n)]
        if sorted(sig1) != sorted(sig2):
            return None
    else:
        sig1 = sig2 = None

    pairs: list[tuple[int, int]] = []
    used_src = [False] * n
    used_tgt = [False] * n

    def step(depth: int) -> bool:
        if depth == n:
            return True
        if depth % 2 == 0:
            x = next(i for i in range(n) if not used_src[i])
            for y in range(n):
                if used_tgt[y]:
                    continue
                if prune and sig1[x] != sig2[y]:
                    continue
                if _pair_consistent(D1, D2, pairs, x, y):
                    pairs.append((x, y))
                    used_src[x] = used_tgt[y] = True
                    if step(depth + 1):
                        return True
                    pairs.pop()
                    used_src[x] = used_tgt[y] = False
            return False
        y = next(i for i in range(n) if not used_tgt[i])
        for x in range(n):
            if used_src[x]:
                continue
            if prune and sig1[x] != sig2[y]:
                continue
            if _pair_consistent(D1, D2, pairs, x, y):
                pairs.append((x, y))
                used_src[x] = used_tgt[y] = True
                if step(depth + 1):
                    return True
                pairs.pop()
                used_src[x] = used_tgt[y] = False
        return False

    if step(0):
        return PartialIsomorphism(D1, D2, tuple(pairs))
    return None


def find_embedding(D_small: FiniteDiversity, D_big: FiniteDiversity) -> Optional[PartialIsomorphism]:
    """Injective value-preserving map of all of D_small into D_big, or None."""
    ns, nb = D_small.n, D_big.n
    if ns > nb:
        return None
    # A source point's distances must all occur among the candidate's.
    sigs = [Counter(_distance_signature(D_small, x)) for x in range(ns)]
    sigb = [Counter(_distance_signature(D_big, y)) for y in range(nb)]
    feasible = [
        [y for y in range(nb) if not (sigs[x] - sigb[y])] for x in range(ns)
    ]

    pairs: list[tuple[int, int]] = []
    used_tgt = [False] * nb

    def step(x: int) -> bool:
        if x == ns:
            return True
        for y in feasible[x]:
            if used_tgt[y]:
                continue
            if _pair_consistent(D_small, D_big, pairs, x, y):
                pairs.append((x, y))
                used_tgt[y] = True
                if step(x + 1):
                    return True
                pairs.pop()
                used_tgt[y] = False
        return False

    if step(0):
        return PartialIsomorphism(D_small, D_big, tuple(pairs))
    return None


def perturb_to_admissible(
    host: FiniteDiversity,
    subset: int,
    func: AdmissibleFunction,
    gamma: Sequence[int],
    eps0: Fraction,
    *,
    order: Sequence[int] | None = None,
) -> AdmissibleFunction:
    """Transport a candidate table along a low-distortion point map, bumping
    each value by a grading that grows down the subset lattice.

    ``gamma`` maps the members of ``subset`` (ascending host index) to host
    points; every nonempty subset value may move by strictly less than
    ``eps0`` under the map.  Nonempty subsets are enumerated supersets
    first (default: descending cardinality, ascending mask within one
    cardinality) and the i-th gets bump i * eps0.
    """
    if subset == 0:
        raise EmptySubset("subset must be nonempty")
    if eps0 <= 0:
        raise StructuralError("eps0 must be positive")
    sel = list(iter_indices(subset))
    k = len(sel)
    if func.base != restrict(host, subset):
        raise StructuralError("function is not over the restricted host")
    if len(gamma) != k:
        raise StructuralError("gamma must list one image per subset member")
    if len(set(gamma)) != k or any(not 0 <= g < host.n for g in gamma):
        raise StructuralError("gamma must be injective into the host")

    def host_mask(fmask: int) -> int:
        out = 0
        for pos in iter_indices(fmask):
            out |= 1 << sel[pos]
        return out

    def image_mask(fmask: int) -> int:
        out = 0
        for pos in iter_indices(fmask):
            out |= 1 << gamma[pos]
        return out

    for fmask in range(1, 1 << k):
        gap = abs(host.values[image_mask(fmask)] - host.values[host_mask(fmask)])
        if gap >= eps0:
            raise DistortionTooLarge(
                f"subset {func.base.subset_labels(fmask)} moves by {gap} >= {eps0}"
            )

    if order is None:
        order = descending_cardinality_order(k)
    else:
        order = tuple(order)
        if sorted(order) != list(range(1, 1 << k)) or not is_superset_first(order):
            raise StructuralError(
                "ordering must list every nonempty subset with supersets first"
            )

    image_points = sorted(gamma)
    image_set_mask = mask_of(gamma)
    pos_of_host = {p: i for i, p in enumerate(image_points)}

    def out_mask(fmask: int) -> int:
        out = 0
        for pos in iter_indices(fmask):
            out |= 1 << pos_of_host[gamma[pos]]
        return out

    out_values = [ZERO] * (1 << k)
    for i, fmask in enumerate(order, start=1):
        out_values[out_mask(fmask)] = func.values[fmask] + i * eps0
    return AdmissibleFunction(restrict(host, image_set_mask), tuple(out_values))
