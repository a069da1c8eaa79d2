"""Command-line interface.

Every command reads/writes the JSON formats from :mod:`divlab.serialize`,
prints exactly one JSON document (a report or an artifact) to stdout and a
one-line human summary to stderr.  Exit codes: 0 for ok/found, 1 for a
semantic negative (invalid table, nothing found, failed precondition),
2 for usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import serialize
from .bounds import SteinerConfig, diameter_diversity, sandwich_check, steiner_diversity
from .core import induced_metric, restrict, validate
from .errors import (
    DistortionTooLarge,
    DivlabError,
    GenerationExhausted,
    InfeasibleInterval,
    NotAdmissible,
    ParseError,
    StructuralError,
)
from .extension import (
    Identified,
    amalgamate,
    extend_from_support,
    has_support,
    hat_delta,
    is_admissible,
)
from .homogeneity import (
    best_realizer,
    find_embedding,
    find_isomorphism,
    perturb_to_admissible,
    realize,
)
from .subsets import iter_indices, parse_key
from .tower import BatterySpec, deficit_trace, grow, initial_state

_SEMANTIC_ERRORS = (NotAdmissible, DistortionTooLarge, GenerationExhausted, InfeasibleInterval)


def _emit(obj: dict, summary: str) -> None:
    print(json.dumps(obj, indent=2))
    print(summary, file=sys.stderr)


def _report_violations(report) -> list:
    return [
        {
            "rule": v.rule,
            "subsets": [list(s) for s in v.subsets],
            "lhs": str(v.lhs),
            "rhs": str(v.rhs),
        }
        for v in report.violations
    ]


def _with_decimal(obj: dict, key: str, value: Fraction) -> dict:
    obj[key] = str(value)
    obj[key + "_decimal"] = float(value)
    return obj


def cmd_validate(args) -> int:
    D = serialize.load_diversity(args.input)
    method = "naive" if args.oracle else "reduced"
    report = validate(D, method=method)
    obj = {"verdict": "ok" if report.ok else "fail", "violations": _report_violations(report)}
    _emit(obj, f"validate: {obj['verdict']} ({len(report.violations)} violations)")
    return 0 if report.ok else 1


def cmd_metric(args) -> int:
    D = serialize.load_diversity(args.input)
    report = validate(D)
    if not report.ok:
        _emit(
            {"verdict": "fail", "violations": _report_violations(report)},
            "metric: input is not a valid diversity",
        )
        return 1
    M = induced_metric(D)
    _emit(serialize.metric_to_obj(M), f"metric: {M.n} points")
    return 0


def cmd_bounds(args) -> int:
    D = serialize.load_diversity(args.input)
    M = induced_metric(D)
    config = SteinerConfig(method="exhaustive" if args.oracle else "dreyfus_wagner")
    if args.witness is not None:
        if args.which != "steiner":
            raise ParseError("--witness only applies to --which steiner")
        from .bounds import SteinerSolver

        subset = parse_key(args.witness, D.index_of())
        solver = SteinerSolver(M, config)
        tree = solver.witness_tree(subset)
        obj = _with_decimal(
            {
                "verdict": "ok",
                "terminals": args.witness.split(),
                "tree": [[M.points[a], M.points[b]] for a, b in tree],
            },
            "weight",
            solver.weight(subset),
        )
        _emit(obj, f"bounds: witness tree with {len(tree)} edges")
        return 0
    if args.which == "diam":
        out = diameter_diversity(M)
        _emit(serialize.diversity_to_obj(out), "bounds: diameter diversity")
        return 0
    if args.which == "steiner":
        out = steiner_diversity(M, config)
        _emit(serialize.diversity_to_obj(out), "bounds: steiner diversity")
        return 0
    report = sandwich_check(D, config)
    obj = {"verdict": "ok" if report.ok else "fail", "violations": _report_violations(report)}
    _emit(obj, f"bounds sandwich: {obj['verdict']}")
    return 0 if report.ok else 1


def cmd_admissible_check(args) -> int:
    D = serialize.load_diversity(args.base)
    f = serialize.load_function(args.input, base=D)
    method = "amalgamation" if args.oracle else "direct"
    report = is_admissible(D, f.values, method=method)
    obj = {"verdict": "ok" if report.ok else "fail", "violations": _report_violations(report)}
    _emit(obj, f"admissible-check: {obj['verdict']}")
    return 0 if report.ok else 1


def cmd_hatdelta(args) -> int:
    members = []
    base = None
    for path in args.inputs:
        f = serialize.load_function(path, base=base)
        base = f.base
        members.append(f)
    value = hat_delta(members, method="naive" if args.oracle else "assignment")
    obj = _with_decimal({"verdict": "ok", "k": len(members)}, "value", value)
    _emit(obj, f"hatdelta: {value}")
    return 0


def cmd_extend(args) -> int:
    D = serialize.load_diversity(args.base)
    subset = parse_key(args.support, D.index_of())
    f = serialize.load_function(args.input, base=restrict(D, subset))
    lifted = extend_from_support(D, subset, f, method="covers" if args.oracle else "assignment")
    _emit(serialize.function_to_obj(lifted), f"extend: lifted from {{{args.support}}}")
    return 0


def cmd_support_check(args) -> int:
    D = serialize.load_diversity(args.base)
    g = serialize.load_function(args.input, base=D)
    subset = parse_key(args.support, D.index_of())
    ok = has_support(D, g, subset)
    obj = {"verdict": "ok" if ok else "fail", "support": args.support.split()}
    _emit(obj, f"support-check: {obj['verdict']}")
    return 0 if ok else 1


def cmd_amalgamate(args) -> int:
    D = serialize.load_diversity(args.base)
    f = serialize.load_function(args.input, base=D)
    result = amalgamate(D, f, args.label)
    if isinstance(result, Identified):
        obj = {"verdict": "found", "identified": result.point}
        _emit(obj, f"amalgamate: new point coincides with {result.point}")
        return 0
    _emit(serialize.diversity_to_obj(result), f"amalgamate: {result.n} points")
    return 0


def cmd_realize(args) -> int:
    host = serialize.load_diversity(args.host)
    with open(args.query, encoding="utf-8") as fh:
        query = serialize.parse_query_obj(json.loads(fh.read()), host)
    x = realize(query)
    if x is None:
        _, err = best_realizer(host, query.subset, query.func)
        obj = _with_decimal({"verdict": "none-found"}, "best_error", err)
        _emit(obj, "realize: no point within epsilon")
        return 1
    _, err = best_realizer(host, query.subset, query.func)
    obj = _with_decimal({"verdict": "found", "witness": host.points[x]}, "error", err)
    _emit(obj, f"realize: {host.points[x]}")
    return 0


def cmd_iso(args) -> int:
    D1 = serialize.load_diversity(args.first)
    D2 = serialize.load_diversity(args.second)
    phi = find_isomorphism(D1, D2)
    if phi is None:
        _emit({"verdict": "none-found"}, "iso: not isomorphic")
        return 1
    witness = {D1.points[x]: D2.points[y] for x, y in sorted(phi.pairs)}
    _emit({"verdict": "found", "witness": witness}, "iso: isomorphic")
    return 0


def cmd_embed(args) -> int:
    small = serialize.load_diversity(args.small)
    big = serialize.load_diversity(args.big)
    phi = find_embedding(small, big)
    if phi is None:
        _emit({"verdict": "none-found"}, "embed: no embedding")
        return 1
    witness = {small.points[x]: big.points[y] for x, y in sorted(phi.pairs)}
    _emit({"verdict": "found", "witness": witness}, "embed: found")
    return 0


def cmd_perturb(args) -> int:
    host = serialize.load_diversity(args.host)
    subset = parse_key(args.subset, host.index_of())
    f = serialize.load_function(args.input, base=restrict(host, subset))
    index_of = host.index_of()
    pairs = {}
    for chunk in args.gamma.replace(",", " ").split():
        if ":" not in chunk:
            raise ParseError(f"gamma entries look like src:dst, got {chunk!r}")
        src, dst = chunk.split(":", 1)
        if src not in index_of or dst not in index_of:
            raise StructuralError(f"unknown point in gamma entry {chunk!r}")
        pairs[index_of[src]] = index_of[dst]
    members = list(iter_indices(subset))
    if sorted(pairs) != members:
        raise StructuralError("gamma must map exactly the members of the subset")
    gamma = [pairs[i] for i in members]
    eps0 = serialize.parse_fraction(args.eps0)
    g = perturb_to_admissible(host, subset, f, gamma, eps0)
    _emit(serialize.function_to_obj(g), "perturb: transported table")
    return 0


def cmd_grow(args) -> int:
    if args.policy:
        policy = serialize.load_policy(args.policy)
    else:
        policy = serialize.parse_policy_obj({})
    from dataclasses import replace

    policy = replace(policy, rounds=args.rounds)
    state = grow(initial_state(args.seed), policy, cap=args.cap)
    text = serialize.tower_to_json(state, policy)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    obj = {"verdict": "ok", "points": state.current.n, "rounds": args.rounds, "out": args.out}
    _emit(obj, f"grow: {state.current.n} points after {args.rounds} rounds")
    return 0


def cmd_deficit(args) -> int:
    state, policy = serialize.load_tower(args.tower)
    spec = BatterySpec(size=args.battery, seed=args.seed)
    rows = deficit_trace(initial_state(state.seed), policy, spec, cap=args.cap)
    with open(args.csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "deficit", "deficit_decimal"])
        for rnd, deficit in rows:
            writer.writerow([rnd, str(deficit), float(deficit)])
    final = rows[-1][1]
    obj = _with_decimal(
        {"verdict": "ok", "rounds": len(rows) - 1, "csv": args.csv}, "final_deficit", final
    )
    _emit(obj, f"deficit: final {final}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divlab",
        description="Exact computation with finite diversities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the diversity axioms")
    p.add_argument("--input", required=True)
    p.add_argument("--oracle", action="store_true", help="use the brute-force checker")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("metric", help="emit the induced metric")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("bounds", help="diameter/steiner diversities and the sandwich check")
    p.add_argument("--input", required=True)
    p.add_argument("--which", required=True, choices=["diam", "steiner", "sandwich"])
    p.add_argument("--oracle", action="store_true", help="brute-force tree enumeration")
    p.add_argument("--witness", help="emit one minimum tree covering this subset key")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("admissible-check", help="check the one-point extension conditions")
    p.add_argument("--base", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--oracle", action="store_true", help="check via amalgamation instead")
    p.set_defaults(func=cmd_admissible_check)

    p = sub.add_parser("hatdelta", help="extension-diversity value of a family")
    p.add_argument("--inputs", required=True, nargs="+")
    p.add_argument("--oracle", action="store_true", help="naive tuple enumeration")
    p.set_defaults(func=cmd_hatdelta)

    p = sub.add_parser("extend", help="maximal extension from a support")
    p.add_argument("--base", required=True)
    p.add_argument("--support", required=True, help='subset key, e.g. "a b"')
    p.add_argument("--input", required=True, help="function over the restricted base")
    p.add_argument("--oracle", action="store_true", help="all-covers enumeration")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("support-check", help="is the subset a support of the function")
    p.add_argument("--base", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--support", required=True)
    p.set_defaults(func=cmd_support_check)

    p = sub.add_parser("amalgamate", help="adjoin one point realizing the function")
    p.add_argument("--base", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True)
    p.set_defaults(func=cmd_amalgamate)

    p = sub.add_parser("realize", help="find a host point realizing a query")
    p.add_argument("--host", required=True)
    p.add_argument("--query", required=True)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("iso", help="total isomorphism search")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("embed", help="embedding search")
    p.add_argument("small")
    p.add_argument("big")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("perturb", help="transport a table along a low-distortion map")
    p.add_argument("--host", required=True)
    p.add_argument("--subset", required=True, help='subset key, e.g. "a b"')
    p.add_argument("--input", required=True, help="function over the restricted host")
    p.add_argument("--gamma", required=True, help='point map, e.g. "a:c,b:d"')
    p.add_argument("--eps0", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("grow", help="grow a tower from a single point")
    p.add_argument("--rounds", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--policy")
    p.add_argument("--cap", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grow)

    p = sub.add_parser("deficit", help="per-round realization deficit trace")
    p.add_argument("--tower", required=True)
    p.add_argument("--battery", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=12)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_deficit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SEMANTIC_ERRORS as e:
        _emit({"verdict": "fail", "error": type(e).__name__, "detail": str(e)}, f"error: {e}")
        return 1
    except DivlabError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
