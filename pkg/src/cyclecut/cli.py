"""Command-line front end.

Exit codes: 0 success, 1 a property violation was detected, 2 invalid input
or usage. Reports are JSON with sorted keys; rationals are "p/q" strings.
"""

from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import _report
from ._rational import parse_vector
from .chain import (
    DEFAULT_ROOT,
    StateDistribution,
    check_necessity,
    even_step,
    odd_step,
    random_region_point,
    region_contains,
    region_vertices,
    select_params,
    swap12,
)
from .cuts import build_hierarchy, hierarchy_to_dot, verify_cycle_cut_instance
from .embedding import assign_frames
from .errors import CycleCutError, InputError, PropertyViolation
from .instance import (
    dump_instance,
    gen_figure1,
    gen_random_cyclecut,
    load_instance,
    lp_value,
    random_blueprint,
    support_multigraph,
)
from .multigraph import global_min_cut_value, is_connected_spanning, weighted_degrees
from .sampler import (
    enumerate_outcomes,
    expectation_report,
    expected_cost,
    expected_multiplicities,
    prepare,
    sample_tour,
    tour_cost,
    usage_report,
    usage_stats,
)


def report_schema_version() -> str:
    return _report.SCHEMA_VERSION


class UsageError(InputError):
    pass


def _emit(report: dict, output: str | None) -> None:
    report.setdefault("schema_version", report_schema_version())
    text = _report.dumps(report)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _read_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return load_instance(text)


def _p_root(text: str | None) -> StateDistribution:
    if text is None:
        return DEFAULT_ROOT
    try:
        values = parse_vector(text)
        if len(values) != 4:
            raise ValueError("expected four comma-separated values")
        return StateDistribution(*values)
    except ValueError as exc:
        raise UsageError(f"bad distribution {text!r}: {exc}") from exc


def _pipeline(args):
    inst = _read_instance(args.file)
    return prepare(inst, _p_root(getattr(args, "p_root", None)), root=getattr(args, "root", None))


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    if args.family == "fig1":
        if args.k is None or args.k < 0:
            raise UsageError("--family fig1 needs --k >= 0")
        inst = gen_figure1(args.k)
    else:
        if args.leaves is None or args.leaves < 3:
            raise UsageError("--family random needs --leaves >= 3")
        rng = random.Random(args.seed)
        blueprint = random_blueprint(rng, args.leaves, args.max_children)
        inst = gen_random_cyclecut(blueprint, args.seed, unit_costs=args.unit_costs)
    text = dump_instance(inst)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    inst = _read_instance(args.file)
    g = support_multigraph(inst)
    h = build_hierarchy(g, inst.root_vertex)
    verdict = verify_cycle_cut_instance(h)
    _emit({
        "valid": True,
        "n": inst.n,
        "support_edges": len(inst.edges),
        "multigraph_edges": g.edge_count,
        "lp_value": str(lp_value(inst)),
        "min_cut": global_min_cut_value(g),
        "root": inst.root_vertex,
        "cycle_cut_instance": verdict.ok,
        "degree_cuts": [sorted(h.cuts[i].members) for i in verdict.offenders],
    }, args.output)
    return 0


def cmd_hierarchy(args) -> int:
    inst = _read_instance(args.file)
    g = support_multigraph(inst)
    h = build_hierarchy(g, inst.root_vertex if args.root is None else args.root)
    verdict = verify_cycle_cut_instance(h)
    frames = assign_frames(h) if verdict.ok else {}
    nodes = []
    for c in h.cuts:
        node = {
            "index": c.index,
            "members": sorted(c.members),
            "parent": c.parent,
            "children": list(c.children),
            "kind": c.kind.value,
            "boundary": sorted(c.boundary),
            "internal": sorted(c.internal),
        }
        f = frames.get(c.index)
        if f is not None:
            node["frame"] = {
                "chain": list(f.chain),
                "pairs": [list(p) for p in f.pairs],
                "roles": dict(zip(("UL", "DL", "UR", "DR"), f.roles)),
                "delta_left": sorted(f.delta_left),
                "twist": f.twist.value,
                "parity": f.parity.value,
            }
        nodes.append(node)
    _emit({
        "root": h.root_vertex,
        "cycle_cut_instance": verdict.ok,
        "offenders": list(verdict.offenders),
        "nodes": nodes,
    }, args.output)
    if args.dot:
        Path(args.dot).write_text(hierarchy_to_dot(h, frames))
    if not verdict.ok:
        print(f"DegreeCutPresent: degree cuts at nodes {list(verdict.offenders)}", file=sys.stderr)
        return 1
    return 0


def cmd_expect(args) -> int:
    pipe = _pipeline(args)
    report = expectation_report(pipe)
    _emit(report, args.output)
    if not report["within_bound"] or report["cross_check"]["mismatched_edges"]:
        print("expected cost bound or cross-check failed", file=sys.stderr)
        return 1
    return 0


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("-n must be positive")
    pipe = _pipeline(args)
    stats = usage_stats(pipe, args.n, args.seed, jobs=args.jobs)
    _emit(usage_report(pipe, stats), args.output)
    if stats.parity_violations or stats.connectivity_violations:
        print("sampled multigraphs violated parity or connectivity", file=sys.stderr)
        return 1
    return 0


def cmd_tour(args) -> int:
    pipe = _pipeline(args)
    sample = sample_tour(pipe, args.seed)
    _emit({
        "seed": args.seed,
        "multiplicities": list(sample.multiplicities),
        "circuit": {"vertices": list(sample.circuit.vertices), "edges": list(sample.circuit.edges)},
        "cost": str(sample.cost),
        "lp_value": str(lp_value(pipe.instance)),
    }, args.output)
    return 0


def _closure_report(count: int, seed: int) -> dict:
    rng = random.Random(seed)
    points = region_vertices() + [random_region_point(rng) for _ in range(count)]
    failures = []
    for p in points:
        params = select_params(p, 2)
        q = even_step(p, params.z, params.w)
        r = odd_step(p, *(Fraction(2, 3),) * 4, k=3)
        if not all(region_contains(x) for x in (q, swap12(q), r, swap12(r))):
            failures.append(p.as_strings())
    return {"points": len(points), "failures": failures}


def cmd_region(args) -> int:
    if args.check is not None:
        p = _p_root(args.check)
        inside = region_contains(p)
        _emit({"distribution": p.as_strings(), "in_region": inside,
               "verdict": "in region" if inside else "not in region"}, args.output)
        return 0 if inside else 1
    if args.necessity is not None:
        p = _p_root(args.necessity)
        cert = check_necessity(p)
        _emit({
            "distribution": p.as_strings(),
            "verdict": cert.verdict,
            "value": None if cert.value is None else str(cert.value),
            "witness": None if cert.witness is None else [str(x) for x in cert.witness],
        }, args.output)
        return 0
    if args.closure_samples is not None:
        if args.seed is None:
            raise UsageError("--closure-samples needs --seed")
        report = _closure_report(args.closure_samples, args.seed)
        _emit(report, args.output)
        return 1 if report["failures"] else 0
    raise UsageError("region needs --check, --necessity or --closure-samples")


def cmd_oracle(args) -> int:
    pipe = _pipeline(args)
    outcomes = enumerate_outcomes(pipe, args.max_paths)
    g = pipe.graph
    merged: dict[tuple[int, ...], Fraction] = {}
    for o in outcomes:
        merged[o.multiplicities] = merged.get(o.multiplicities, Fraction(0)) + o.probability
    means = [Fraction(0)] * g.edge_count
    for mult, p in merged.items():
        for i, m in enumerate(mult):
            means[i] += m * p
    invalid = sum(
        1 for mult in merged
        if any(d % 2 for d in weighted_degrees(g, mult)) or not is_connected_spanning(g, mult)
    )
    exact_cost = sum((tour_cost(g, mult) * p for mult, p in merged.items()), Fraction(0))
    closed = expected_multiplicities(pipe)
    lp = lp_value(pipe.instance)
    report = {
        "paths": len(outcomes),
        "outcomes": len(merged),
        "probability_sum": str(sum(merged.values(), Fraction(0))),
        "invalid_outcomes": invalid,
        "expected_cost": str(exact_cost),
        "closed_form_cost": str(expected_cost(pipe)),
        "lp_value": str(lp),
        "ratio": str(exact_cost / lp),
        "edges": [{"id": i, "expected": str(m)} for i, m in enumerate(means)],
        "closed_form_agrees": means == closed,
    }
    _emit(report, args.output)
    return 0 if invalid == 0 and means == closed and exact_cost <= Fraction(4, 3) * lp else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclecut", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_output(p):
        p.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
        return p

    gen = with_output(sub.add_parser("gen", help="generate an instance"))
    gen.add_argument("--family", choices=("fig1", "random"), required=True)
    gen.add_argument("--k", type=int, help="path length parameter of the fig1 family")
    gen.add_argument("--leaves", type=int, help="leaf count of a random blueprint")
    gen.add_argument("--max-children", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--unit-costs", action="store_true")
    gen.set_defaults(func=cmd_gen)

    check = with_output(sub.add_parser("check", help="validate an instance"))
    check.add_argument("file")
    check.set_defaults(func=cmd_check)

    hier = with_output(sub.add_parser("hierarchy", help="critical cuts and frames"))
    hier.add_argument("file")
    hier.add_argument("--root", type=int)
    hier.add_argument("--dot", help="also write a DOT drawing of the hierarchy")
    hier.set_defaults(func=cmd_hierarchy)

    for name, func, helptext in (
        ("expect", cmd_expect, "exact expected multiplicities and cost"),
        ("sample", cmd_sample, "Monte Carlo usage statistics"),
        ("tour", cmd_tour, "sample one Eulerian tour"),
        ("oracle", cmd_oracle, "enumerate every random branch exactly"),
    ):
        p = with_output(sub.add_parser(name, help=helptext))
        p.add_argument("file")
        p.add_argument("--root", type=int)
        p.add_argument("--p-root", help="root distribution as four p/q values (p4 must be 0)")
        p.set_defaults(func=func)
        if name == "sample":
            p.add_argument("-n", type=int, required=True)
            p.add_argument("--seed", type=int, required=True)
            p.add_argument("--jobs", type=int, default=1)
        elif name == "tour":
            p.add_argument("--seed", type=int, required=True)
        elif name == "oracle":
            p.add_argument("--max-paths", type=int, default=200_000)

    region = with_output(sub.add_parser("region", help="feasible region algebra"))
    group = region.add_mutually_exclusive_group(required=True)
    group.add_argument("--check", metavar="P")
    group.add_argument("--necessity", metavar="P")
    group.add_argument("--closure-samples", type=int, metavar="M")
    region.add_argument("--seed", type=int)
    region.set_defaults(func=cmd_region)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("UsageError: --seed must be an unsigned integer", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except CycleCutError as exc:
        code = 1 if isinstance(exc, PropertyViolation) else 2
        name = type(exc).__name__
        print(f"{name}: {exc}", file=sys.stderr)
        _emit({"error": {"type": name, "message": str(exc)}}, getattr(args, "output", None))
        return code


def main() -> None:
    sys.exit(run())
