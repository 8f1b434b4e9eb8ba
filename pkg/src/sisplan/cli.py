"""``sisplan`` command line.

Exit codes: 0 success, 1 domain failure (violations, unreachable goal, no
feasible plan), 2 usage or parse failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .graph import IRI, Graph, Literal, PrefixMap, UnknownPrefix
from .lexer import ParseError
from .matchmaker import (STRICT, TYPE_RELAXED, NotASimulation, influences_on, inputs_of,
                         quality_criteria_of, simulations_for_output)
from .planner import (CONVEX, WEAKEST_LINK, GoalUnreachable, PlanRequest, ScoringConfig,
                      plan, sweep_values, whatif)
from .report import (dumps, report_doc, report_dot, report_text, rows_doc, rows_table,
                     sweep_doc, sweep_table, validation_doc, validation_text)
from .schema import extract_records, influence_group_sums, validate
from .sparql import execute, parse_query
from .turtle import parse_turtle, read_turtle
from .vocab import Vocabulary

PREFIX_ENV = "SISPLAN_PREFIXES"

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    inputs: List[str]
    prefix_overrides: Dict[str, str] = field(default_factory=dict)
    weights: Dict[str, float] = field(default_factory=dict)
    requirements: Dict[str, float] = field(default_factory=dict)
    limits: Dict[str, float] = field(default_factory=dict)
    output_format: str = "table"
    match_mode: str = STRICT


# -- loading ----------------------------------------------------------------

def _merge_prefixes(target: PrefixMap, source: Dict[str, str], origin: str,
                    origins: Dict[str, str]) -> None:
    for label, ns in source.items():
        if label in target and target[label] != ns:
            raise UsageError(f"prefix '{label}:' is bound to <{target[label]}> in {origins[label]} "
                             f"and to <{ns}> in {origin}")
        target[label] = ns
        origins.setdefault(label, origin)


def load_graph(config: RunConfig) -> Graph:
    """Merge all input files into one graph, with prefix maps checked for conflicts."""
    merged = Graph()
    prefixes = PrefixMap()
    origins: Dict[str, str] = {}
    env_file = os.environ.get(PREFIX_ENV)
    if env_file:
        try:
            text = Path(env_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read prefix file {env_file}: {exc.strerror}")
        _merge_prefixes(prefixes, parse_turtle(text, source=env_file).prefixes, env_file, origins)
    for path in config.inputs:
        try:
            g = read_turtle(path)
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}")
        _merge_prefixes(prefixes, g.prefixes, path, origins)
        merged.update(g)
    for label, ns in config.prefix_overrides.items():
        prefixes.bind(label, ns)
    merged.prefixes = prefixes
    return merged


def resolve_term(prefixes: PrefixMap, text: str) -> IRI:
    """``<iri>``, a prefixed name, or an absolute IRI."""
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        return IRI(text[1:-1])
    label = text.split(":", 1)[0] if ":" in text else None
    if label is not None and label in prefixes:
        return prefixes.expand(text)
    if "://" in text or text.startswith("urn:"):
        return IRI(text)
    if label is None:
        raise UsageError(f"not a prefixed name or IRI: {text!r}")
    raise UsageError(f"unknown prefix '{label}:' in {text!r}")


_REQ = re.compile(r"^(?P<k>.+?)\s*(?P<op>>=|<=)\s*(?P<v>[^<>=]+)$")


def _number(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{what}: {text!r} is not a number")


def parse_requirement(text: str):
    m = _REQ.match(text.strip())
    if not m:
        raise UsageError(f"requirement must look like KIND>=VALUE or KIND<=VALUE, got {text!r}")
    return m.group("k"), m.group("op"), _number(m.group("v"), "requirement")


def parse_assignment(text: str, what: str):
    if "=" not in text:
        raise UsageError(f"{what} must look like KEY=VALUE, got {text!r}")
    k, v = text.rsplit("=", 1)
    return k.strip(), v.strip()


def parse_sweep(text: str):
    k, rng = parse_assignment(text, "--sweep")
    parts = rng.split(":")
    if len(parts) != 3:
        raise UsageError(f"--sweep range must be LO:HI:STEP, got {rng!r}")
    lo, hi, step = (_number(p, "--sweep") for p in parts)
    if step <= 0:
        raise UsageError("--sweep step must be positive")
    return k, lo, hi, step


# -- output -----------------------------------------------------------------

def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _warn(messages: Sequence[str]) -> None:
    for m in messages:
        print(f"warning: {m}", file=sys.stderr)


def _no_dot(args) -> None:
    if args.format == "dot":
        raise UsageError("--format dot is only available for plan")


def _rows(args, kind: str, header, rows, prefixes) -> None:
    _no_dot(args)
    if args.format == "json":
        _emit(args, dumps(rows_doc(kind, header, rows, prefixes)))
    else:
        _emit(args, rows_table(header, rows, prefixes))


# -- subcommands ------------------------------------------------------------

def _model(args, graph: Graph):
    return extract_records(graph, Vocabulary.from_prefixes(graph.prefixes))


def cmd_validate(args, config: RunConfig, graph: Graph) -> int:
    _no_dot(args)
    model = _model(args, graph)
    violations = validate(graph, model.vocab, bundle=model)
    if args.format == "json":
        _emit(args, dumps(validation_doc(violations, influence_group_sums(model), graph.prefixes)))
    else:
        _emit(args, validation_text(violations, graph.prefixes))
    return EXIT_DOMAIN if any(v.severity == "error" for v in violations) else EXIT_OK


def cmd_query(args, config: RunConfig, graph: Graph) -> int:
    path = Path(args.query_file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    query = parse_query(text, source=str(path))
    try:
        table = execute(graph, query)
    except UnknownPrefix as exc:
        raise UsageError(f"{path}: unknown prefix '{exc.args[0]}:'")
    _rows(args, "query", table.header, table.tuples(), graph.prefixes)
    return EXIT_OK


def cmd_capabilities(args, config: RunConfig, graph: Graph) -> int:
    model = _model(args, graph)
    param = resolve_term(graph.prefixes, args.output)
    matches = simulations_for_output(model, param, config.match_mode)
    _rows(args, "capabilities", ["process", "capability", "simulation"], matches, graph.prefixes)
    return EXIT_OK


def _simulation_arg(args, graph):
    return resolve_term(graph.prefixes, args.sim)


def cmd_inputs(args, config: RunConfig, graph: Graph) -> int:
    model = _model(args, graph)
    rows = inputs_of(model, _simulation_arg(args, graph))
    _rows(args, "inputs", ["capability", "process", "parameter"], rows, graph.prefixes)
    return EXIT_OK


def cmd_criteria(args, config: RunConfig, graph: Graph) -> int:
    model = _model(args, graph)
    crits = quality_criteria_of(model, _simulation_arg(args, graph))
    rows = [(c.id, c.kind if c.kind is not None else Literal(""),
             c.literal if c.literal is not None else Literal("")) for c in crits]
    _rows(args, "criteria", ["criterion", "kind", "value"], rows, graph.prefixes)
    return EXIT_OK


def cmd_influences(args, config: RunConfig, graph: Graph) -> int:
    model = _model(args, graph)
    infs = influences_on(model, _simulation_arg(args, graph))
    rows = [(i.source, i.id, i.target_process,
             i.literal if i.literal is not None else Literal("")) for i in infs]
    _rows(args, "influences", ["parameter", "influence", "process", "value"], rows, graph.prefixes)
    return EXIT_OK


def _plan_request(args, config: RunConfig, graph: Graph) -> PlanRequest:
    pm = graph.prefixes
    goal = resolve_term(pm, args.goal)
    known = set()
    for chunk in args.known or []:
        for item in chunk.split(","):
            if item.strip():
                known.add(resolve_term(pm, item))
    weights = {resolve_term(pm, k): v for k, v in config.weights.items()}
    reqs = {resolve_term(pm, k): v for k, v in config.requirements.items()}
    limits = {resolve_term(pm, k): v for k, v in config.limits.items()}
    if args.max_depth < 0 or args.max_plans < 1:
        raise UsageError("--max-depth must be >= 0 and --max-plans >= 1")
    return PlanRequest(goal, frozenset(known), weights, reqs, limits,
                       args.max_depth, args.max_plans, config.match_mode)


def _scoring(args) -> ScoringConfig:
    return ScoringConfig(aggregator=args.aggregator)


def cmd_plan(args, config: RunConfig, graph: Graph) -> int:
    model = _model(args, graph)
    request = _plan_request(args, config, graph)
    report = plan(model, request, _scoring(args))
    _warn(report.warnings)
    if args.format == "json":
        _emit(args, dumps(report_doc(model, report)))
    elif args.format == "dot":
        _emit(args, report_dot(model, report))
    else:
        _emit(args, report_text(model, report))
    return EXIT_OK if report.feasible else EXIT_DOMAIN


def cmd_whatif(args, config: RunConfig, graph: Graph) -> int:
    _no_dot(args)
    model = _model(args, graph)
    request = _plan_request(args, config, graph)
    k, lo, hi, step = parse_sweep(args.sweep)
    kind = resolve_term(graph.prefixes, k)
    rows, warnings = whatif(model, request, kind, sweep_values(lo, hi, step), _scoring(args))
    _warn(warnings)
    if args.format == "json":
        _emit(args, dumps(sweep_doc(model, kind, rows, warnings)))
    else:
        _emit(args, sweep_table(model, kind, rows))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    files = argparse.ArgumentParser(add_help=False)
    files.add_argument("inputs", nargs="+", metavar="FILE.ttl", help="Turtle input files")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prefix", action="append", default=[], metavar="LABEL=IRI",
                        help="bind or override a prefix for names given on the command line")
    common.add_argument("--format", choices=["table", "json", "dot"], default="table")
    common.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    common.add_argument("--mode", choices=[STRICT, TYPE_RELAXED], default=STRICT,
                        help="parameter matching mode")

    planning = argparse.ArgumentParser(add_help=False)
    planning.add_argument("--goal", required=True, help="parameter to produce")
    planning.add_argument("--known", action="append", metavar="P1,P2,...",
                          help="parameters already available (comma separated, repeatable)")
    planning.add_argument("--require", action="append", default=[], metavar="KIND>=V",
                          help="quality requirement, KIND>=V or KIND<=V")
    planning.add_argument("--weight", action="append", default=[], metavar="KIND=W",
                          help="ranking weight of a criterion kind")
    planning.add_argument("--aggregator", choices=[CONVEX, WEAKEST_LINK], default=CONVEX)
    planning.add_argument("--max-depth", type=int, default=16)
    planning.add_argument("--max-plans", type=int, default=1000)

    parser = argparse.ArgumentParser(
        prog="sisplan",
        description="Query simulation capability models and plan simulation sequences.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[files, common], help="check model rules")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("query", parents=[common], help="run a SELECT query file")
    p.add_argument("query_file", metavar="QUERY.rq")
    p.add_argument("inputs", nargs="+", metavar="FILE.ttl", help="Turtle input files")
    p.set_defaults(func=cmd_query)
    p = sub.add_parser("capabilities", parents=[files, common], help="simulations able to produce a parameter")
    p.add_argument("--output", required=True, metavar="PARAM")
    p.set_defaults(func=cmd_capabilities)
    for name, func, text in [("inputs", cmd_inputs, "inputs of a simulation"),
                             ("criteria", cmd_criteria, "quality criteria of a simulation"),
                             ("influences", cmd_influences, "parameter influences of a simulation")]:
        p = sub.add_parser(name, parents=[files, common], help=text)
        p.add_argument("--sim", required=True, metavar="SIMULATION")
        p.set_defaults(func=func)
    p = sub.add_parser("plan", parents=[files, common, planning], help="enumerate and rank plans")
    p.set_defaults(func=cmd_plan)
    p = sub.add_parser("whatif", parents=[files, common, planning],
                       help="sweep a requirement threshold and compare feasible plans")
    p.add_argument("--sweep", required=True, metavar="KIND=LO:HI:STEP")
    p.set_defaults(func=cmd_whatif)
    return parser


def _config(args) -> RunConfig:
    overrides = {}
    for item in args.prefix:
        label, ns = parse_assignment(item, "--prefix")
        label = label.rstrip(":")
        ns = ns[1:-1] if ns.startswith("<") and ns.endswith(">") else ns
        overrides[label] = ns
    weights, reqs, limits = {}, {}, {}
    for item in getattr(args, "weight", []):
        k, v = parse_assignment(item, "--weight")
        w = _number(v, "--weight")
        if w < 0:
            raise UsageError(f"--weight {k}: weights must be nonnegative")
        weights[k] = w
    for item in getattr(args, "require", []):
        k, op, v = parse_requirement(item)
        (reqs if op == ">=" else limits)[k] = v
    return RunConfig(list(args.inputs), overrides, weights, reqs, limits, args.format, args.mode)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    try:
        config = _config(args)
        graph = load_graph(config)
        return args.func(args, config, graph)
    except ParseError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnknownPrefix, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotASimulation as exc:
        print(f"error: {graph.prefixes.format(exc.node)} is not a simulation", file=sys.stderr)
        return EXIT_DOMAIN
    except GoalUnreachable as exc:
        pm = graph.prefixes
        print("error: goal unreachable: " + " -> ".join(pm.format(t) for t in exc.chain),
              file=sys.stderr)
        last = exc.chain[-1]
        if last in exc.chain[:-1]:
            print(f"  {pm.format(last)} can only be produced from itself", file=sys.stderr)
        else:
            print(f"  no known value and no producing simulation for {pm.format(last)}",
                  file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
