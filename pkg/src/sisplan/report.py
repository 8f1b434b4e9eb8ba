"""Rendering of model views, plans and sweeps as JSON documents, text tables and DOT.

Every JSON document carries ``schema`` and ``version`` keys matching one of the
JSON Schema files under ``sisplan/schemas``.
"""
from __future__ import annotations

import json
from typing import Dict, Iterable, List, Optional, Sequence

from .graph import PrefixMap, Term, sort_key
from .planner import (NodeKey, PlanReport, RankedPlan, SweepRow, Violated,
                      topological_order)
from .schema import ModelBundle, Violation

SCHEMA_VERSION = 1


def num(value: Optional[float]) -> Optional[float]:
    """Round away float noise such as 0.5000000000000001 before output."""
    if value is None:
        return None
    r = round(float(value), 12)
    return 0.0 if r == 0 else r


def fmt_num(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return repr(num(value))


def node_id(prefixes: PrefixMap, key: NodeKey) -> str:
    process, simulation = key
    return f"{prefixes.format(simulation)}@{prefixes.format(process)}"


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def text_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    rows = [list(r) for r in rows]
    widths = [len(h) for h in header]
    for r in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, r)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
             "  ".join("-" * w for w in widths)]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


# -- row-shaped results -----------------------------------------------------

def rows_doc(kind: str, header: Sequence[str], rows: Sequence[Sequence[Term]],
             prefixes: PrefixMap) -> dict:
    return {
        "schema": "sisplan/rows",
        "version": SCHEMA_VERSION,
        "kind": kind,
        "columns": list(header),
        "rows": [{h: prefixes.format(t) for h, t in zip(header, row)} for row in rows],
    }


def rows_table(header: Sequence[str], rows: Sequence[Sequence[Term]], prefixes: PrefixMap) -> str:
    body = text_table(header, [[prefixes.format(t) for t in row] for row in rows])
    return body + f"({len(rows)} row{'s' if len(rows) != 1 else ''})\n"


# -- validation -------------------------------------------------------------

def validation_doc(violations: Sequence[Violation], groups: Dict, prefixes: PrefixMap) -> dict:
    errors = sum(1 for v in violations if v.severity == "error")
    return {
        "schema": "sisplan/validate",
        "version": SCHEMA_VERSION,
        "errors": errors,
        "warnings": len(violations) - errors,
        "violations": [v.to_dict(prefixes) for v in violations],
        "influenceGroups": [
            {"process": prefixes.format(p), "element": prefixes.format(e) if e is not None else None,
             "total": num(total)}
            for (p, e), total in sorted(groups.items(),
                                        key=lambda kv: (sort_key(kv[0][0]),
                                                        sort_key(kv[0][1]) if kv[0][1] else (0, "")))
        ],
    }


def validation_text(violations: Sequence[Violation], prefixes: PrefixMap) -> str:
    errors = sum(1 for v in violations if v.severity == "error")
    lines = [v.to_text(prefixes) for v in violations]
    warnings = len(violations) - errors
    lines.append(f"{errors} error{'s' if errors != 1 else ''}, "
                 f"{warnings} warning{'s' if warnings != 1 else ''}")
    return "\n".join(lines) + "\n"


# -- plans ------------------------------------------------------------------

def _verdict(v: Violated, prefixes: PrefixMap) -> dict:
    return {
        "criterion": prefixes.format(v.criterion),
        "node": node_id(prefixes, v.node) if v.node is not None else None,
        "value": num(v.value),
        "bound": v.bound,
        "threshold": num(v.threshold),
    }


def plan_doc(model: ModelBundle, rp: RankedPlan, rank: int) -> dict:
    pm = model.prefixes
    dag, card = rp.dag, rp.score
    order = topological_order(dag)
    nodes = []
    for node in order:
        nodes.append({
            "id": node_id(pm, node.key),
            "simulation": pm.format(node.simulation),
            "process": pm.format(node.process),
            "capability": pm.format(node.capability),
            "consumedKnown": sorted(pm.format(t) for t in node.consumed_known),
            "consumedProduced": {pm.format(p): node_id(pm, k)
                                 for p, k in sorted(node.consumed_produced.items(),
                                                    key=lambda kv: sort_key(kv[0]))},
            "produced": sorted(pm.format(t) for t in node.produced),
            "accuracy": {pm.format(k): num(v) for k, v in
                         sorted(card.node_accuracy.get(node.key, {}).items(),
                                key=lambda kv: sort_key(kv[0]))},
        })
    interdeps = {}
    for node in order:
        deps = model.processes[node.process].interdependencies
        if deps:
            interdeps[pm.format(node.process)] = sorted(pm.format(d) for d in deps)
    return {
        "rank": rank,
        "feasible": rp.feasible,
        "verdicts": [_verdict(v, pm) for v in rp.violations],
        "root": node_id(pm, dag.root) if dag.root is not None else None,
        "nodes": nodes,
        "edges": [{"from": node_id(pm, a), "to": node_id(pm, b), "parameter": pm.format(p)}
                  for a, b, p in dag.edges],
        "order": [node_id(pm, n.key) for n in order],
        "score": {
            "perCriterion": {pm.format(k): num(v) for k, v in
                             sorted(card.per_criterion.items(), key=lambda kv: sort_key(kv[0]))},
            "effectiveAccuracy": num(card.effective_accuracy),
            "totalTimeLike": num(card.total_time_like),
            "weightedScore": num(card.weighted_score),
            "propagatedRequirements": [
                {"node": node_id(pm, key), "criterion": pm.format(kind), "threshold": num(t)}
                for (key, kind), t in sorted(card.propagated_requirements.items(),
                                             key=lambda kv: ([o.key for o in order].index(kv[0][0]),
                                                             sort_key(kv[0][1])))
            ],
        },
        "annotations": {"interdependencies": interdeps},
    }


def _term_map(pm: PrefixMap, m: Dict[Term, float]) -> Dict[str, float]:
    return {pm.format(k): num(v) for k, v in sorted(m.items(), key=lambda kv: sort_key(kv[0]))}


def report_doc(model: ModelBundle, report: PlanReport) -> dict:
    pm = model.prefixes
    req = report.request
    return {
        "schema": "sisplan/plan",
        "version": SCHEMA_VERSION,
        "goal": pm.format(req.goal),
        "known": sorted(pm.format(t) for t in req.known),
        "weights": _term_map(pm, req.weights),
        "requirements": _term_map(pm, req.requirements),
        "limits": _term_map(pm, req.limits),
        "partial": {"depthExceeded": report.depth_exceeded,
                    "planLimitReached": report.plan_limit_reached},
        "feasibleCount": len(report.feasible),
        "warnings": list(report.warnings),
        "plans": [plan_doc(model, rp, i + 1) for i, rp in enumerate(report.ranked)],
    }


def report_text(model: ModelBundle, report: PlanReport) -> str:
    pm = model.prefixes
    req = report.request
    out = [f"goal {pm.format(req.goal)}; known {{{', '.join(sorted(pm.format(t) for t in req.known))}}}",
           f"{len(report.ranked)} plan{'s' if len(report.ranked) != 1 else ''}, "
           f"{len(report.feasible)} feasible"]
    if report.depth_exceeded:
        out.append("partial: maximum depth reached")
    if report.plan_limit_reached:
        out.append("partial: plan limit reached")
    for i, rp in enumerate(report.ranked, 1):
        card = rp.score
        order = topological_order(rp.dag)
        out.append("")
        out.append(f"plan {i}  {'feasible' if rp.feasible else 'INFEASIBLE'}  "
                   f"score {fmt_num(card.weighted_score)}  nodes {len(rp.dag)}")
        if order:
            out.append("  order: " + " -> ".join(pm.format(n.simulation) for n in order))
        else:
            out.append("  order: (empty plan, goal already known)")
        for n in order:
            out.append(f"    {pm.format(n.simulation)} executes {pm.format(n.process)} "
                       f"via {pm.format(n.capability)}")
        for kind, value in sorted(card.per_criterion.items(), key=lambda kv: sort_key(kv[0])):
            out.append(f"  {pm.format(kind)} = {fmt_num(value)}")
        out.append(f"  effective accuracy {fmt_num(card.effective_accuracy)}, "
                   f"total time {fmt_num(card.total_time_like)}")
        for (key, kind), t in sorted(card.propagated_requirements.items(),
                                     key=lambda kv: ([o.key for o in order].index(kv[0][0]),
                                                     sort_key(kv[0][1]))):
            out.append(f"  requires {pm.format(kind)} >= {fmt_num(t)} at {node_id(pm, key)}")
        for v in rp.violations:
            where = node_id(pm, v.node) if v.node is not None else "plan"
            out.append(f"  violates {pm.format(v.criterion)} {v.bound} {fmt_num(v.threshold)} "
                       f"at {where} (value {fmt_num(v.value)})")
    return "\n".join(out) + "\n"


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def plan_dot(model: ModelBundle, rp: RankedPlan, rank: int) -> str:
    pm = model.prefixes
    lines = [f"digraph plan{rank} {{",
             "  rankdir=LR;",
             f"  label={_dot_id(f'plan {rank} ' + ('feasible' if rp.feasible else 'infeasible'))};",
             "  node [shape=box];"]
    order = topological_order(rp.dag)
    for n in order:
        label = f"{pm.format(n.simulation)}\\n{pm.format(n.process)}"
        acc = rp.score.node_accuracy.get(n.key, {})
        for kind, v in sorted(acc.items(), key=lambda kv: sort_key(kv[0])):
            label += f"\\n{pm.format(kind)}={fmt_num(v)}"
        lines.append(f"  {_dot_id(node_id(pm, n.key))} [label=\"{label}\"];")
    for a, b, p in rp.dag.edges:
        lines.append(f"  {_dot_id(node_id(pm, a))} -> {_dot_id(node_id(pm, b))} "
                     f"[label={_dot_id(pm.format(p))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def report_dot(model: ModelBundle, report: PlanReport) -> str:
    return "".join(plan_dot(model, rp, i) for i, rp in enumerate(report.ranked, 1))


# -- what-if ----------------------------------------------------------------

def _top(model: ModelBundle, top: Optional[RankedPlan]) -> Optional[List[str]]:
    if top is None:
        return None
    return [model.prefixes.format(n.simulation) for n in topological_order(top.dag)]


def sweep_doc(model: ModelBundle, kind: Term, rows: Sequence[SweepRow], warnings: List[str]) -> dict:
    return {
        "schema": "sisplan/whatif",
        "version": SCHEMA_VERSION,
        "criterion": model.prefixes.format(kind),
        "warnings": list(warnings),
        "rows": [{"threshold": num(r.threshold),
                  "feasibleCount": r.feasible_count,
                  "top": _top(model, r.top),
                  "score": num(r.top.score.weighted_score) if r.top else None}
                 for r in rows],
    }


def sweep_table(model: ModelBundle, kind: Term, rows: Sequence[SweepRow]) -> str:
    body = []
    for r in rows:
        top = _top(model, r.top)
        body.append([fmt_num(r.threshold), str(r.feasible_count),
                     " -> ".join(top) if top is not None else "-",
                     fmt_num(r.top.score.weighted_score) if r.top else "-"])
    return text_table([model.prefixes.format(kind), "feasible", "top plan", "score"], body)
