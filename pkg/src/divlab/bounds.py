"""Diameter and Steiner diversities of a finite metric space.

These are the least and greatest diversities inducing a given metric:
the diameter diversity takes the widest pair inside a subset, the Steiner
diversity the minimum total weight of a tree (vertices drawn from the
whole point set) covering the subset.  Every diversity over the metric is
sandwiched between them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import FiniteDiversity, MetricSpace, ValidationReport, Violation, ZERO, induced_metric
from .errors import CapExceeded, StructuralError
from .subsets import iter_indices, popcount

EXHAUSTIVE_TERMINAL_LIMIT = 6


@dataclass(frozen=True)
class SteinerConfig:
    method: str = "dreyfus_wagner"
    terminal_cap: int = 10

    def __post_init__(self):
        if self.method not in ("dreyfus_wagner", "exhaustive"):
            raise StructuralError(f"unknown Steiner method {self.method!r}")


def diameter_diversity(M: MetricSpace) -> FiniteDiversity:
    """Widest-pair table: value(A) = max distance inside A."""
    n = M.n
    full = 1 << n
    d = M.dist
    values = [ZERO] * full
    for mask in range(1, full):
        low = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << low)
        best = values[rest]
        for j in iter_indices(rest):
            if d[low][j] > best:
                best = d[low][j]
        values[mask] = best
    return FiniteDiversity(M.points, tuple(values))


class SteinerSolver:
    """Minimum Steiner tree weights in the complete graph on a metric space.

    Weights are computed per terminal set by the Dreyfus-Wagner subset
    dynamic program (or brute-force tree enumeration) and memoized; the
    cache only ever gains entries, and recomputation is idempotent.
    """

    def __init__(self, M: MetricSpace, config: SteinerConfig | None = None):
        self.M = M
        self.config = config or SteinerConfig()
        self._weights: dict[int, Fraction] = {}

    def weight(self, terminal_mask: int) -> Fraction:
        cached = self._weights.get(terminal_mask)
        if cached is not None:
            return cached
        k = popcount(terminal_mask)
        if k <= 1:
            w = ZERO
        elif self.config.method == "exhaustive":
            if k > EXHAUSTIVE_TERMINAL_LIMIT:
                raise CapExceeded(
                    f"exhaustive tree enumeration limited to {EXHAUSTIVE_TERMINAL_LIMIT} terminals"
                )
            w = _steiner_exhaustive(self.M, terminal_mask)
        else:
            if k > self.config.terminal_cap:
                raise CapExceeded(
                    f"terminal set of {k} points exceeds the cap {self.config.terminal_cap}"
                )
            w = _steiner_dreyfus_wagner(self.M, terminal_mask)
        self._weights[terminal_mask] = w
        return w

    def witness_tree(self, terminal_mask: int) -> tuple[tuple[int, int], ...]:
        """One minimum tree covering the terminals, as sorted vertex-index
        edges.  Chosen deterministically among optima."""
        target = self.weight(terminal_mask)
        if popcount(terminal_mask) <= 1:
            return ()
        n = self.M.n
        best_tree = None
        full = (1 << n) - 1
        rest = full ^ terminal_mask
        # Grow the vertex set greedily: among all supersets realizing the
        # optimum, take the lexicographically least, then its MST.
        extras = [m for m in _submasks_sorted(rest)]
        for extra in extras:
            vset = terminal_mask | extra
            w, tree = _mst(self.M, vset)
            if w == target:
                best_tree = tree
                break
        if best_tree is None:
            raise AssertionError("no vertex set realizes the computed Steiner weight")
        return tuple(sorted(best_tree))

    def diversity(self) -> FiniteDiversity:
        full = 1 << self.M.n
        values = tuple(self.weight(mask) for mask in range(full))
        return FiniteDiversity(self.M.points, values)


def _submasks_sorted(mask: int):
    subs = []
    sub = mask
    while True:
        subs.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return sorted(subs, key=lambda m: (popcount(m), m))


def _mst(M: MetricSpace, vset: int) -> tuple[Fraction, list[tuple[int, int]]]:
    verts = list(iter_indices(vset))
    if len(verts) <= 1:
        return ZERO, []
    d = M.dist
    in_tree = {verts[0]}
    edges = []
    total = ZERO
    best = {v: (d[verts[0]][v], verts[0]) for v in verts[1:]}
    while len(in_tree) < len(verts):
        v = min(best, key=lambda u: (best[u][0], u))
        w, parent = best.pop(v)
        in_tree.add(v)
        total += w
        edges.append((min(v, parent), max(v, parent)))
        for u in best:
            if d[v][u] < best[u][0]:
                best[u] = (d[v][u], v)
    return total, edges


def _steiner_dreyfus_wagner(M: MetricSpace, terminal_mask: int) -> Fraction:
    """Subset DP over terminal splits; the metric is its own shortest-path
    closure, so one relaxation pass over direct edges is exact."""
    d = M.dist
    n = M.n
    terminals = list(iter_indices(terminal_mask))
    root = terminals[0]
    others = terminals[1:]
    k = len(others)
    dp: list[Optional[list[Fraction]]] = [None] * (1 << k)
    for i in range(k):
        t = others[i]
        dp[1 << i] = [d[t][v] for v in range(n)]
    for tmask in range(1, 1 << k):
        if dp[tmask] is not None:
            continue
        low = tmask & -tmask
        merged = [None] * n
        for v in range(n):
            best = None
            sub = tmask
            # Splits with the lowest terminal on one fixed side.
            while sub:
                if sub & low:
                    other = tmask ^ sub
                    if other:
                        cand = dp[sub][v] + dp[other][v]
                        if best is None or cand < best:
                            best = cand
                sub = (sub - 1) & tmask
            merged[v] = best
        row = [None] * n
        for v in range(n):
            best = merged[v]
            for u in range(n):
                if u == v:
                    continue
                cand = merged[u] + d[u][v]
                if best is None or cand < best:
                    best = cand
            row[v] = best
        dp[tmask] = row
    return dp[(1 << k) - 1][root]


def _prufer_trees(verts: Sequence[int]):
    """All labeled trees on the given vertices, as edge lists (Prufer
    decoding with the smallest-leaf rule; one tree per sequence)."""
    m = len(verts)
    if m == 1:
        yield []
        return
    if m == 2:
        yield [(verts[0], verts[1])]
        return
    for seq in itertools.product(range(m), repeat=m - 2):
        degree = [1] * m
        for s in seq:
            degree[s] += 1
        edges = []
        for s in seq:
            leaf = next(i for i in range(m) if degree[i] == 1)
            edges.append((verts[leaf], verts[s]))
            degree[leaf] = 0
            degree[s] -= 1
        a, b = (i for i in range(m) if degree[i] == 1)
        edges.append((verts[a], verts[b]))
        yield edges


def _steiner_exhaustive(M: MetricSpace, terminal_mask: int) -> Fraction:
    """Brute force: every tree over every vertex superset of the terminals."""
    d = M.dist
    full = (1 << M.n) - 1
    rest = full ^ terminal_mask
    best = None
    sub = rest
    while True:
        verts = list(iter_indices(terminal_mask | sub))
        for edges in _prufer_trees(verts):
            w = sum((d[a][b] for a, b in edges), ZERO)
            if best is None or w < best:
                best = w
        if sub == 0:
            break
        sub = (sub - 1) & rest
    return best


def steiner_diversity(M: MetricSpace, config: SteinerConfig | None = None) -> FiniteDiversity:
    """Full Steiner table over the metric; lazy per-subset weights come from
    :class:`SteinerSolver`."""
    cfg = config or SteinerConfig()
    if cfg.method == "dreyfus_wagner" and M.n > cfg.terminal_cap:
        raise CapExceeded(
            f"{M.n} points exceeds the terminal cap {cfg.terminal_cap}"
        )
    return SteinerSolver(M, cfg).diversity()


def sandwich_check(D: FiniteDiversity, config: SteinerConfig | None = None) -> ValidationReport:
    """Verify diameter(A) <= delta(A) <= steiner(A) for every subset."""
    M = induced_metric(D)
    lo = diameter_diversity(M)
    hi = SteinerSolver(M, config)
    violations = []
    for mask in range(1 << D.n):
        v = D.values[mask]
        if lo.values[mask] > v:
            violations.append(
                Violation("sandwich-lower", (D.subset_labels(mask),), lo.values[mask], v)
            )
        h = hi.weight(mask)
        if v > h:
            violations.append(
                Violation("sandwich-upper", (D.subset_labels(mask),), v, h)
            )
    return ValidationReport(not violations, tuple(violations))
