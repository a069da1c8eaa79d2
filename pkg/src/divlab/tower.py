"""Seeded growth of finite diversities by iterated one-point amalgamation.

Starting from a single point, each round samples an admissible function on
a small random support, lifts it maximally to the whole ground set, and
adjoins a fresh point realizing it.  Everything is driven by explicit
seeds: a grown state is a pure function of (initial state, policy, seed),
and replaying the recorded history reproduces it exactly.

The limit object this imitates adjoins *all* finitely supported one-point
extensions at every stage; at desk scale we sample one per round and track
how far the result is from realizing random extension queries exactly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Optional, Sequence

from .core import FiniteDiversity, MetricSpace, ZERO, induced_metric, restrict
from .errors import CapExceeded, GenerationExhausted, InfeasibleInterval, StructuralError
from .extension import (
    AdmissibleFunction,
    Identified,
    admissible_quick,
    amalgamate,
    extend_from_support,
)
from .homogeneity import RealizationQuery, extension_deficit
from .subsets import iter_indices, mask_of

DEFAULT_CAP = 12

INITIAL_LABEL = "z0"


@dataclass(frozen=True)
class GrowthPolicy:
    """Knobs for tower growth and admissible-function sampling."""

    rounds: int = 0
    support_size_max: int = 3
    value_granularity: Fraction = Fraction(1, 8)
    diameter_cap: Fraction = Fraction(4)
    star_weight: int = 1
    rejection_weight: int = 1
    max_retries: int = 256

    def __post_init__(self):
        if self.rounds < 0:
            raise StructuralError("rounds must be nonnegative")
        if self.support_size_max < 1:
            raise StructuralError("support_size_max must be at least 1")
        if self.value_granularity <= 0 or self.diameter_cap <= 0:
            raise StructuralError("granularity and cap must be positive")
        if self.star_weight < 0 or self.rejection_weight < 0:
            raise StructuralError("generator weights must be nonnegative")
        if self.star_weight + self.rejection_weight == 0:
            raise StructuralError("at least one generator weight must be positive")
        if self.max_retries < 1:
            raise StructuralError("max_retries must be at least 1")


@dataclass(frozen=True)
class GrowthRecord:
    round: int
    support: tuple[str, ...]
    values: tuple[Fraction, ...]


@dataclass(frozen=True)
class TowerState:
    current: FiniteDiversity
    history: tuple[GrowthRecord, ...]
    seed: int


@dataclass(frozen=True)
class BatterySpec:
    """Per-round query battery for deficit measurement."""

    size: int = 20
    support_size_max: int = 2
    seed: int = 0


def initial_state(seed: int) -> TowerState:
    return TowerState(FiniteDiversity((INITIAL_LABEL,), (ZERO, ZERO)), (), seed)


def random_katetov(M: MetricSpace, rng: random.Random, policy: GrowthPolicy) -> list[Fraction]:
    """Sample distances from a virtual new point, sequentially per point.

    Each value is drawn uniformly from the granularity grid inside the
    interval forced by the one-point metric extension constraints
    |r(x) - r(y)| <= d(x, y) <= r(x) + r(y), bounded above by the cap.
    """
    g = policy.value_granularity
    cap = policy.diameter_cap
    d = M.dist
    r: list[Fraction] = []
    for i in range(M.n):
        lo = ZERO
        hi = cap
        for j in range(i):
            forced_low = abs(r[j] - d[i][j])
            if forced_low > lo:
                lo = forced_low
            allowed_high = r[j] + d[i][j]
            if allowed_high < hi:
                hi = allowed_high
        if lo > cap:
            raise InfeasibleInterval(
                f"forced lower bound {lo} for {M.points[i]} exceeds the cap {cap}"
            )
        lo_idx = ceil(lo / g)
        hi_idx = floor(hi / g)
        if lo_idx > hi_idx:
            raise InfeasibleInterval(
                f"no grid multiple of {g} inside [{lo}, {hi}] for {M.points[i]}"
            )
        r.append(g * rng.randint(lo_idx, hi_idx))
    return r


def _star_table(D: FiniteDiversity, r: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Candidate table delta(A) + min over A of r.  Not always admissible:
    deep wells in r can break subadditivity, so callers must verify."""
    full = 1 << D.n
    out = [ZERO] * full
    for mask in range(1, full):
        best = None
        for i in iter_indices(mask):
            if best is None or r[i] < best:
                best = r[i]
        out[mask] = D.values[mask] + best
    return tuple(out)


def random_support_function(
    D: FiniteDiversity, rng: random.Random, policy: GrowthPolicy
) -> AdmissibleFunction:
    """Verified admissible function over D, sampled by the policy's
    generator mix.

    ``star`` draws a one-point metric extension profile and offsets every
    subset by its cheapest member; ``rejection`` additionally jitters the
    table on the granularity grid.  Both verify the result and resample on
    failure, up to the retry budget.
    """
    g = policy.value_granularity
    total = policy.star_weight + policy.rejection_weight
    metric = induced_metric(D)
    for _ in range(policy.max_retries):
        use_star = rng.randrange(total) < policy.star_weight
        try:
            r = random_katetov(metric, rng, policy)
        except InfeasibleInterval:
            # Pairs farther apart than twice the cap can never be bridged;
            # closer misses can succeed with a fresh draw.
            continue
        table = _star_table(D, r)
        if not use_star:
            jittered = [ZERO]
            for mask in range(1, 1 << D.n):
                v = table[mask] + g * rng.randint(-2, 2)
                if v < D.values[mask]:
                    v = D.values[mask]
                jittered.append(v)
            table = tuple(jittered)
        if admissible_quick(D, table):
            return AdmissibleFunction(D, table)
    raise GenerationExhausted(
        f"no admissible sample within {policy.max_retries} retries"
    )


def random_admissible(
    D: FiniteDiversity, subset: int, rng: random.Random, policy: GrowthPolicy
) -> AdmissibleFunction:
    """Sample on the sub-diversity of ``subset`` and lift maximally to D."""
    f = random_support_function(restrict(D, subset), rng, policy)
    return extend_from_support(D, subset, f)


def _round_rng(seed: int, round_no: int) -> random.Random:
    return random.Random(f"divlab:grow:{seed}:{round_no}")


def _grow_one(
    state: TowerState, policy: GrowthPolicy, round_no: int, rng: Optional[random.Random]
) -> TowerState:
    cur = state.current
    r = rng if rng is not None else _round_rng(state.seed, round_no)
    label = f"z{round_no}"
    for _ in range(policy.max_retries):
        size = r.randint(1, min(policy.support_size_max, cur.n))
        support = sorted(r.sample(range(cur.n), size))
        subset = mask_of(support)
        try:
            f = random_admissible(cur, subset, r, policy)
        except GenerationExhausted:
            continue  # support may be unbridgeable under the cap; redraw it
        result = amalgamate(cur, f, label, check=False)
        if isinstance(result, Identified):
            continue
        record = GrowthRecord(round_no, cur.subset_labels(subset), f.values)
        return TowerState(result, state.history + (record,), state.seed)
    raise GenerationExhausted(
        f"round {round_no}: no usable sample within {policy.max_retries} attempts"
    )


def grow(
    state: TowerState,
    policy: GrowthPolicy,
    rng: Optional[random.Random] = None,
    *,
    cap: int = DEFAULT_CAP,
) -> TowerState:
    """Run ``policy.rounds`` one-point growth rounds.

    With ``rng=None`` every round uses its own generator derived from the
    state seed and the round number, so results replay exactly.
    """
    if state.current.n + policy.rounds > cap:
        raise CapExceeded(
            f"{state.current.n} points + {policy.rounds} rounds exceeds the cap {cap}"
        )
    out = state
    for _ in range(policy.rounds):
        round_no = len(out.history) + 1
        out = _grow_one(out, policy, round_no, rng)
    return out


def replay(state: TowerState) -> FiniteDiversity:
    """Rebuild the current diversity from the recorded history."""
    cur = initial_state(state.seed).current
    for record in state.history:
        f = AdmissibleFunction(cur, record.values)
        result = amalgamate(cur, f, f"z{record.round}", check=False)
        if isinstance(result, Identified):
            raise StructuralError("recorded table identifies an existing point")
        cur = result
    return cur


def _battery_rng(spec: BatterySpec, round_no: int) -> random.Random:
    return random.Random(f"divlab:battery:{spec.seed}:{round_no}")


def sample_battery(
    D: FiniteDiversity, spec: BatterySpec, policy: GrowthPolicy, round_no: int
) -> list[RealizationQuery]:
    rng = _battery_rng(spec, round_no)
    queries = []
    for _ in range(spec.size):
        for _ in range(policy.max_retries):
            size = rng.randint(1, min(spec.support_size_max, D.n))
            subset = mask_of(sorted(rng.sample(range(D.n), size)))
            try:
                f = random_support_function(restrict(D, subset), rng, policy)
            except GenerationExhausted:
                continue  # unbridgeable subset under the cap; redraw it
            queries.append(RealizationQuery(D, subset, f, ZERO))
            break
        else:
            raise GenerationExhausted("battery sampling exhausted its retries")
    return queries


def deficit_trace(
    initial: TowerState,
    policy: GrowthPolicy,
    battery: BatterySpec,
    *,
    cap: int = DEFAULT_CAP,
) -> list[tuple[int, Fraction]]:
    """Per-round exact-realization deficit against fresh seeded batteries.

    Row k holds the deficit of the state after k growth rounds; row 0 is
    the initial state.  Fully determined by (initial, policy, battery).
    """
    if initial.current.n + policy.rounds > cap:
        raise CapExceeded(
            f"{initial.current.n} points + {policy.rounds} rounds exceeds the cap {cap}"
        )
    rows = []
    state = initial
    queries = sample_battery(state.current, battery, policy, 0)
    rows.append((0, extension_deficit(state.current, queries)))
    for k in range(1, policy.rounds + 1):
        state = _grow_one(state, policy, len(state.history) + 1, None)
        queries = sample_battery(state.current, battery, policy, k)
        rows.append((k, extension_deficit(state.current, queries)))
    return rows


def random_diversity(
    n_points: int,
    seed: int,
    *,
    policy: GrowthPolicy | None = None,
    cap: int = DEFAULT_CAP,
) -> FiniteDiversity:
    """Valid random diversity on ``n_points`` points, grown from one point.

    Handy wherever tests need arbitrary valid tables: growth only ever
    amalgamates verified admissible functions, so the result satisfies the
    axioms by construction.
    """
    if n_points < 1:
        raise StructuralError("need at least one point")
    base = policy or GrowthPolicy()
    p = GrowthPolicy(
        rounds=n_points - 1,
        support_size_max=base.support_size_max,
        value_granularity=base.value_granularity,
        diameter_cap=base.diameter_cap,
        star_weight=base.star_weight,
        rejection_weight=base.rejection_weight,
        max_retries=base.max_retries,
    )
    return grow(initial_state(seed), p, cap=cap).current
