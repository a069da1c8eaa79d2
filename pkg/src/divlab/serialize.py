"""JSON file formats.

Diversity files look like

    {"points": ["a", "b", "c"],
     "values": {"a b": "1", "a c": "1", "b c": "1", "a b c": "2"}}

with one entry per subset of size >= 2 (smaller subsets are implicitly
zero) and values written as decimal or "p/q" rational strings.  Extension
function files add an entry for every subset including "" for the empty
set, plus a base diversity (inline or a file path).  Serialization is
canonical: keys ordered by size then ground-set order, rationals in lowest
terms, so parse-then-serialize is byte-stable.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Any

from .core import FiniteDiversity, MetricSpace, ZERO
from .errors import ParseError, StructuralError
from .extension import AdmissibleFunction
from .subsets import format_key, iter_indices, parse_key, popcount
from .tower import GrowthPolicy, GrowthRecord, TowerState, initial_state


def fraction_to_str(v: Fraction) -> str:
    return str(v)


def parse_fraction(raw: Any) -> Fraction:
    if isinstance(raw, bool):
        raise ParseError(f"not a rational value: {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as e:
            raise ParseError(f"bad rational {raw!r}: {e}") from None
    raise ParseError(f"rational values must be strings or integers, got {type(raw).__name__}")


def _ordered_masks(n: int, min_size: int):
    masks = [m for m in range(1 << n) if popcount(m) >= min_size]
    masks.sort(key=lambda m: (popcount(m), m))
    return masks


def diversity_to_obj(D: FiniteDiversity) -> dict:
    values = {
        format_key(mask, D.points): fraction_to_str(D.values[mask])
        for mask in _ordered_masks(D.n, 2)
    }
    return {"points": list(D.points), "values": values}


def diversity_to_json(D: FiniteDiversity) -> str:
    return json.dumps(diversity_to_obj(D), indent=2) + "\n"


def _load_obj(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None


def parse_diversity_obj(obj: Any) -> FiniteDiversity:
    if not isinstance(obj, dict):
        raise ParseError("diversity file must be a JSON object")
    points = obj.get("points")
    if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
        raise ParseError('"points" must be a list of strings')
    values = obj.get("values")
    if not isinstance(values, dict):
        raise ParseError('"values" must be an object mapping subset keys to rationals')
    extra = set(obj) - {"points", "values"}
    if extra:
        raise ParseError(f"unexpected fields: {sorted(extra)}")
    pts = tuple(points)
    n = len(pts)
    if n == 0:
        raise StructuralError("diversity must have at least one point")
    index_of = {p: i for i, p in enumerate(pts)}
    if len(index_of) != n:
        raise StructuralError("duplicate point labels")
    table = [None] * (1 << n)
    table[0] = ZERO
    for i in range(n):
        table[1 << i] = ZERO
    for key, raw in values.items():
        mask = parse_key(key, index_of)
        v = parse_fraction(raw)
        if popcount(mask) <= 1:
            if v != 0:
                raise StructuralError(
                    f"subset {key!r} of size <= 1 must be 0 (implicitly stored)"
                )
            continue
        if table[mask] is not None:
            raise StructuralError(f"subset {key!r} appears more than once")
        table[mask] = v
    missing = [m for m in range(1 << n) if table[m] is None]
    if missing:
        names = ", ".join(repr(format_key(m, pts)) for m in missing[:5])
        raise StructuralError(f"missing subset entries: {names}")
    return FiniteDiversity(pts, tuple(table))


def parse_diversity(text: str) -> FiniteDiversity:
    return parse_diversity_obj(_load_obj(text))


def load_diversity(path: str) -> FiniteDiversity:
    with open(path, encoding="utf-8") as fh:
        return parse_diversity(fh.read())


def metric_to_obj(M: MetricSpace) -> dict:
    dist = {}
    for i in range(M.n):
        for j in range(i + 1, M.n):
            dist[f"{M.points[i]} {M.points[j]}"] = fraction_to_str(M.dist[i][j])
    return {"points": list(M.points), "dist": dist}


def function_to_obj(f: AdmissibleFunction, *, inline_base: bool = True) -> dict:
    values = {
        format_key(mask, f.base.points): fraction_to_str(f.values[mask])
        for mask in _ordered_masks(f.base.n, 0)
    }
    obj: dict[str, Any] = {}
    if inline_base:
        obj["base"] = diversity_to_obj(f.base)
    obj["values"] = values
    if f.support is not None:
        obj["support"] = list(f.base.subset_labels(f.support))
    return obj


def function_to_json(f: AdmissibleFunction, *, inline_base: bool = True) -> str:
    return json.dumps(function_to_obj(f, inline_base=inline_base), indent=2) + "\n"


def parse_function_obj(
    obj: Any,
    *,
    base: FiniteDiversity | None = None,
    base_dir: str = ".",
) -> AdmissibleFunction:
    """Parse an extension-function file.

    The base may be inline (a diversity object), a path string relative to
    ``base_dir``, or supplied by the caller (overriding any file content is
    an error if they disagree).
    """
    if not isinstance(obj, dict):
        raise ParseError("function file must be a JSON object")
    raw_base = obj.get("base")
    file_base = None
    if isinstance(raw_base, str):
        file_base = load_diversity(os.path.join(base_dir, raw_base))
    elif isinstance(raw_base, dict):
        file_base = parse_diversity_obj(raw_base)
    elif raw_base is not None:
        raise ParseError('"base" must be a diversity object or a path string')
    if base is not None and file_base is not None and base != file_base:
        raise StructuralError("function base disagrees with the supplied base diversity")
    use_base = base if base is not None else file_base
    if use_base is None:
        raise StructuralError("no base diversity given for the function")

    values = obj.get("values")
    if not isinstance(values, dict):
        raise ParseError('"values" must be an object mapping subset keys to rationals')
    index_of = use_base.index_of()
    n = use_base.n
    table = [None] * (1 << n)
    for key, raw in values.items():
        mask = parse_key(key, index_of)
        if table[mask] is not None:
            raise StructuralError(f"subset {key!r} appears more than once")
        table[mask] = parse_fraction(raw)
    missing = [m for m in range(1 << n) if table[m] is None]
    if missing:
        names = ", ".join(repr(format_key(m, use_base.points)) for m in missing[:5])
        raise StructuralError(f"missing subset entries: {names}")

    support = None
    if "support" in obj:
        labels = obj["support"]
        if not isinstance(labels, list):
            raise ParseError('"support" must be a list of point labels')
        support = 0
        for label in labels:
            if label not in index_of:
                raise StructuralError(f"support label {label!r} is not a point")
            support |= 1 << index_of[label]
    return AdmissibleFunction(use_base, tuple(table), support=support)


def parse_function(text: str, **kwargs) -> AdmissibleFunction:
    return parse_function_obj(_load_obj(text), **kwargs)


def load_function(path: str, *, base: FiniteDiversity | None = None) -> AdmissibleFunction:
    with open(path, encoding="utf-8") as fh:
        return parse_function(fh.read(), base=base, base_dir=os.path.dirname(path) or ".")


def policy_to_obj(p: GrowthPolicy) -> dict:
    return {
        "rounds": p.rounds,
        "support_size_max": p.support_size_max,
        "value_granularity": fraction_to_str(p.value_granularity),
        "diameter_cap": fraction_to_str(p.diameter_cap),
        "generator_mix": {"star": p.star_weight, "rejection": p.rejection_weight},
        "max_retries": p.max_retries,
    }


def parse_policy_obj(obj: Any) -> GrowthPolicy:
    if not isinstance(obj, dict):
        raise ParseError("policy file must be a JSON object")
    known = {
        "rounds",
        "support_size_max",
        "value_granularity",
        "diameter_cap",
        "generator_mix",
        "max_retries",
    }
    extra = set(obj) - known
    if extra:
        raise ParseError(f"unexpected policy fields: {sorted(extra)}")
    mix = obj.get("generator_mix", {})
    if not isinstance(mix, dict) or set(mix) - {"star", "rejection"}:
        raise ParseError('"generator_mix" must map "star"/"rejection" to weights')
    defaults = GrowthPolicy()

    def int_field(source, key, fallback):
        v = source.get(key, fallback)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParseError(f'"{key}" must be an integer')
        return v

    return GrowthPolicy(
        rounds=int_field(obj, "rounds", defaults.rounds),
        support_size_max=int_field(obj, "support_size_max", defaults.support_size_max),
        value_granularity=parse_fraction(obj.get("value_granularity", str(defaults.value_granularity))),
        diameter_cap=parse_fraction(obj.get("diameter_cap", str(defaults.diameter_cap))),
        star_weight=int_field(mix, "star", defaults.star_weight),
        rejection_weight=int_field(mix, "rejection", defaults.rejection_weight),
        max_retries=int_field(obj, "max_retries", defaults.max_retries),
    )


def load_policy(path: str) -> GrowthPolicy:
    with open(path, encoding="utf-8") as fh:
        return parse_policy_obj(_load_obj(fh.read()))


def tower_to_obj(state: TowerState, policy: GrowthPolicy) -> dict:
    history = []
    # Record k's table lives over the ground set of round k-1; recover the
    # point list by replaying label growth.
    points = [*initial_state(state.seed).current.points]
    for rec in state.history:
        entry_points = list(points)
        values = {
            " ".join(entry_points[i] for i in iter_indices(mask)): fraction_to_str(v)
            for mask, v in enumerate(rec.values)
        }
        history.append(
            {"round": rec.round, "support": list(rec.support), "values": values}
        )
        points.append(f"z{rec.round}")
    return {
        "seed": state.seed,
        "policy": policy_to_obj(policy),
        "current": diversity_to_obj(state.current),
        "history": history,
    }


def tower_to_json(state: TowerState, policy: GrowthPolicy) -> str:
    return json.dumps(tower_to_obj(state, policy), indent=2) + "\n"


def parse_tower_obj(obj: Any) -> tuple[TowerState, GrowthPolicy]:
    if not isinstance(obj, dict):
        raise ParseError("tower file must be a JSON object")
    seed = obj.get("seed")
    if not isinstance(seed, int):
        raise ParseError('"seed" must be an integer')
    policy = parse_policy_obj(obj.get("policy", {}))
    current = parse_diversity_obj(obj.get("current"))
    raw_history = obj.get("history", [])
    if not isinstance(raw_history, list):
        raise ParseError('"history" must be a list')
    records = []
    points = [*initial_state(seed).current.points]
    for entry in raw_history:
        if not isinstance(entry, dict):
            raise ParseError("history entries must be objects")
        rnd = entry.get("round")
        support = entry.get("support")
        values = entry.get("values")
        if not isinstance(rnd, int) or not isinstance(support, list) or not isinstance(values, dict):
            raise ParseError("history entries need round, support, values")
        index_of = {p: i for i, p in enumerate(points)}
        table = [None] * (1 << len(points))
        for key, raw in values.items():
            table[parse_key(key, index_of)] = parse_fraction(raw)
        if any(v is None for v in table):
            raise StructuralError(f"history round {rnd}: incomplete table")
        records.append(GrowthRecord(rnd, tuple(support), tuple(table)))
        points.append(f"z{rnd}")
    state = TowerState(current, tuple(records), seed)
    return state, policy


def load_tower(path: str) -> tuple[TowerState, GrowthPolicy]:
    with open(path, encoding="utf-8") as fh:
        return parse_tower_obj(_load_obj(fh.read()))


def parse_query_obj(obj: Any, host: FiniteDiversity):
    """Realization query: {"F": "a b", "values": {...}, "epsilon": "0"}."""
    from .homogeneity import RealizationQuery
    from .core import restrict

    if not isinstance(obj, dict):
        raise ParseError("query file must be a JSON object")
    subset_key = obj.get("F")
    if not isinstance(subset_key, str):
        raise ParseError('"F" must be a subset key string')
    subset = parse_key(subset_key, host.index_of())
    if subset == 0:
        raise StructuralError('"F" must be nonempty')
    func = parse_function_obj({"values": obj.get("values")}, base=restrict(host, subset))
    epsilon = parse_fraction(obj.get("epsilon", "0"))
    return RealizationQuery(host, subset, func, epsilon)
