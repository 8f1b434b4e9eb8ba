"""Schema axioms, typed record extraction and model validation.

Domain and range declarations are checked, never used to infer types: a
subject of ``SiS:hasQualityCriteria`` that is not typed as a simulation is
reported by :func:`validate` rather than silently promoted.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .graph import (
    Graph, IRI, Literal, OWL_EQUIVALENTCLASS, PrefixMap, RDFS_SUBCLASSOF, RDF_TYPE, Term,
    sort_key,
)
from .vocab import DEFAULT_VOCAB, Vocabulary

SUM_TOLERANCE = 1e-6

ERROR = "error"
WARNING = "warning"


class SchemaCycleError(ValueError):
    def __init__(self, cycle: List[IRI]):
        self.cycle = cycle
        super().__init__("subclass cycle: " + " -> ".join(c.value for c in cycle))


@dataclass
class SchemaAxioms:
    subclass_of: List[Tuple[IRI, IRI]]
    equivalent: List[Tuple[IRI, IRI]]
    domain_range: Dict[IRI, Tuple[IRI, IRI]]

    @classmethod
    def default(cls, vocab: Vocabulary = DEFAULT_VOCAB) -> "SchemaAxioms":
        CSS, VDI, DIN, SiS, ParX = vocab.CSS, vocab.VDI3633, vocab.DINEN61360, vocab.SiS, vocab.ParX
        return cls(
            subclass_of=[
                (VDI.Simulation, CSS.Resource),
                (SiS.QualityCriteria, DIN.DataElement),
                (SiS.SensitivityIndex, SiS.Influence),
                (SiS.InfluenceScore, SiS.Influence),
                (SiS.Interdependency, SiS.Influence),
                (SiS.SensitivityIndex, DIN.DataElement),
            ],
            equivalent=[(ParX.Interdependency, SiS.Interdependency)],
            domain_range={
                VDI.hasProcessQuantity: (CSS.Process, VDI.Data),
                VDI.hasResultsData: (CSS.Process, VDI.Data),
                SiS.hasQualityCriteria: (VDI.Simulation, SiS.QualityCriteria),
                SiS.hasInfluence: (VDI.Data, SiS.Influence),
                SiS.hasInfluenceOn: (SiS.Influence, DIN.DataElement),
                SiS.isInfluenceFor: (SiS.Influence, CSS.Process),
                ParX.hasApplication: (CSS.Process, ParX.Interdependency),
                CSS.providesCapability: (CSS.Resource, CSS.Capability),
                CSS.requiresCapability: (CSS.Process, CSS.Capability),
                CSS.executes: (CSS.Resource, CSS.Process),
                DIN.hasDataElement: (VDI.Data, DIN.DataElement),
            },
        )

    def with_graph(self, graph: Graph) -> "SchemaAxioms":
        """Copy extended by the graph's own rdfs:subClassOf / owl:equivalentClass triples."""
        sub = list(self.subclass_of)
        eq = list(self.equivalent)
        for t in graph.triples(p=RDFS_SUBCLASSOF):
            if isinstance(t.subject, IRI) and isinstance(t.object, IRI):
                sub.append((t.subject, t.object))
        for t in graph.triples(p=OWL_EQUIVALENTCLASS):
            if isinstance(t.subject, IRI) and isinstance(t.object, IRI):
                eq.append((t.subject, t.object))
        return SchemaAxioms(sub, eq, dict(self.domain_range))


def subclass_closure(axioms: SchemaAxioms) -> Dict[IRI, FrozenSet[IRI]]:
    """Reflexive-transitive superclass sets for every class named in ``axioms``.

    Equivalent classes share one set. A subclass cycle that is not an
    equivalence raises :class:`SchemaCycleError`.
    """
    parent: Dict[IRI, IRI] = {}

    def find(x: IRI) -> IRI:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    classes: Set[IRI] = set()
    for a, b in list(axioms.subclass_of) + list(axioms.equivalent):
        classes.update((a, b))
    for c in classes:
        find(c)
    for a, b in axioms.equivalent:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb, key=sort_key)] = min(ra, rb, key=sort_key)

    members: Dict[IRI, Set[IRI]] = defaultdict(set)
    for c in classes:
        members[find(c)].add(c)
    edges: Dict[IRI, Set[IRI]] = defaultdict(set)
    for a, b in axioms.subclass_of:
        ra, rb = find(a), find(b)
        if ra != rb:
            edges[ra].add(rb)

    # cycle check over equivalence groups
    state: Dict[IRI, int] = {}
    for start in sorted(members, key=sort_key):
        if state.get(start):
            continue
        stack = [(start, iter(sorted(edges[start], key=sort_key)))]
        path = [start]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
                path.pop()
                continue
            if state.get(nxt) == 1:
                cycle = path[path.index(nxt):] + [nxt]
                raise SchemaCycleError(cycle)
            if not state.get(nxt):
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(edges[nxt], key=sort_key))))

    group_up: Dict[IRI, FrozenSet[IRI]] = {}

    def up(root: IRI) -> FrozenSet[IRI]:
        if root not in group_up:
            acc = set(members[root])
            for r in edges[root]:
                acc |= up(r)
            group_up[root] = frozenset(acc)
        return group_up[root]

    return {c: up(find(c)) for c in classes}


# -- records ----------------------------------------------------------------

@dataclass
class QualityCriterion:
    id: Term
    kind: Optional[IRI]
    value: Optional[float]
    unit_hint: Optional[str] = None
    instance_description: Optional[Term] = None
    literal: Optional[Literal] = None


@dataclass
class SimulationRecord:
    id: Term
    provides: FrozenSet[Term]
    criteria: List[QualityCriterion]


@dataclass
class ProcessRecord:
    id: Term
    requires: FrozenSet[Term]
    inputs: FrozenSet[Term]
    outputs: FrozenSet[Term]
    interdependencies: FrozenSet[Term]


@dataclass
class CapabilityRecord:
    id: Term
    provided_by: FrozenSet[Term]
    required_by: FrozenSet[Term]


@dataclass
class ParameterRecord:
    id: Term
    data_element: Optional[Term] = None
    type_description: Optional[Term] = None
    instance_value: object = None
    instance_description: Optional[Term] = None
    literal: Optional[Literal] = None


SENSITIVITY_INDEX = "sensitivityIndex"
INFLUENCE_SCORE = "influenceScore"
INTERDEPENDENCY = "interdependency"
NUMERIC_INFLUENCE_KINDS = (SENSITIVITY_INDEX, INFLUENCE_SCORE)


@dataclass
class InfluenceRecord:
    id: Term
    kind: Optional[str]
    source: Optional[Term]
    target_process: Optional[Term] = None
    target_element: Optional[Term] = None
    value: Optional[float] = None
    type_description: Optional[Term] = None
    instance_description: Optional[Term] = None
    literal: Optional[Literal] = None


@dataclass
class ModelBundle:
    """Typed view of a graph. Record dicts are keyed by node and sorted."""

    vocab: Vocabulary
    graph: Graph
    types: Dict[Term, FrozenSet[IRI]]
    simulations: Dict[Term, SimulationRecord] = field(default_factory=dict)
    processes: Dict[Term, ProcessRecord] = field(default_factory=dict)
    capabilities: Dict[Term, CapabilityRecord] = field(default_factory=dict)
    parameters: Dict[Term, ParameterRecord] = field(default_factory=dict)
    criteria: Dict[Term, QualityCriterion] = field(default_factory=dict)
    influences: Dict[Term, InfluenceRecord] = field(default_factory=dict)

    def is_a(self, node: Term, cls: IRI) -> bool:
        return cls in self.types.get(node, ())

    @property
    def prefixes(self) -> PrefixMap:
        return self.graph.prefixes

    def producers_of(self, parameter: Term) -> List[ProcessRecord]:
        return [p for p in self.processes.values() if parameter in p.outputs]

    def consumers_of(self, parameter: Term) -> List[ProcessRecord]:
        return [p for p in self.processes.values() if parameter in p.inputs]

    def to_graph(self) -> Graph:
        """Re-project the records (plus asserted types) onto vocabulary triples."""
        v = self.vocab
        CSS, VDI, DIN, SiS, ParX = v.CSS, v.VDI3633, v.DINEN61360, v.SiS, v.ParX
        g = Graph(prefixes=self.graph.prefixes)
        for t in self.graph.triples(p=RDF_TYPE):
            g.insert(t)
        for sim in self.simulations.values():
            for cap in sim.provides:
                g.add(sim.id, CSS.providesCapability, cap)
            for crit in sim.criteria:
                g.add(sim.id, SiS.hasQualityCriteria, crit.id)
        for cap in self.capabilities.values():
            for res in cap.provided_by:
                g.add(res, CSS.providesCapability, cap.id)
        for proc in self.processes.values():
            for cap in proc.requires:
                g.add(proc.id, CSS.requiresCapability, cap)
            for p in proc.inputs:
                g.add(proc.id, VDI.hasProcessQuantity, p)
            for p in proc.outputs:
                g.add(proc.id, VDI.hasResultsData, p)
            for dep in proc.interdependencies:
                g.add(proc.id, ParX.hasApplication, dep)

        def described(node, type_desc, inst, lit):
            if type_desc is not None:
                g.add(node, DIN.hasTypeDescription, type_desc)
            if inst is not None:
                g.add(node, DIN.hasInstanceDescription, inst)
                if lit is not None:
                    g.add(inst, DIN.value, lit)

        for crit in self.criteria.values():
            described(crit.id, crit.kind, crit.instance_description, crit.literal)
        for par in self.parameters.values():
            if par.data_element is not None:
                g.add(par.id, DIN.hasDataElement, par.data_element)
                described(par.data_element, par.type_description, par.instance_description,
                          par.literal)
        for inf in self.influences.values():
            if inf.source is not None:
                g.add(inf.source, SiS.hasInfluence, inf.id)
            if inf.target_process is not None:
                g.add(inf.id, SiS.isInfluenceFor, inf.target_process)
            if inf.target_element is not None:
                g.add(inf.id, SiS.hasInfluenceOn, inf.target_element)
            described(inf.id, inf.type_description, inf.instance_description, inf.literal)
        return g


def _sorted(nodes: Iterable[Term]) -> List[Term]:
    return sorted(set(nodes), key=sort_key)


def decode_number(term: Optional[Term]) -> Optional[float]:
    """Numeric value of a literal, accepting numeric-looking plain strings."""
    if not isinstance(term, Literal):
        return None
    if term.is_numeric:
        try:
            return float(term.value)
        except (ValueError, ArithmeticError):
            return None
    if term.datatype is None or term.datatype.endswith("#string"):
        try:
            return float(term.lexical.strip())
        except ValueError:
            return None
    return None


def node_types(graph: Graph, closure: Mapping[IRI, FrozenSet[IRI]]) -> Dict[Term, FrozenSet[IRI]]:
    asserted: Dict[Term, Set[IRI]] = defaultdict(set)
    for t in graph.triples(p=RDF_TYPE):
        if isinstance(t.object, IRI):
            asserted[t.subject] |= closure.get(t.object, frozenset((t.object,)))
    return {k: frozenset(v) for k, v in asserted.items()}


def _description(graph: Graph, vocab: Vocabulary, node: Term):
    DIN = vocab.DINEN61360
    type_desc = graph.value(node, DIN.hasTypeDescription)
    inst = graph.value(node, DIN.hasInstanceDescription)
    lit = graph.value(inst, DIN.value) if inst is not None else None
    return type_desc, inst, lit


def extract_records(graph: Graph, vocab: Optional[Vocabulary] = None,
                    axioms: Optional[SchemaAxioms] = None) -> ModelBundle:
    """Build typed records from ``graph``.

    Total: nodes are picked up by asserted type (after subclass closure) and by
    the role they play in a vocabulary arc, so badly typed data still yields
    records for :func:`validate` to report on.
    """
    vocab = vocab or Vocabulary.from_prefixes(graph.prefixes)
    axioms = (axioms or SchemaAxioms.default(vocab)).with_graph(graph)
    closure = subclass_closure(axioms)
    types = node_types(graph, closure)
    CSS, VDI, DIN, SiS, ParX = vocab.CSS, vocab.VDI3633, vocab.DINEN61360, vocab.SiS, vocab.ParX
    bundle = ModelBundle(vocab=vocab, graph=graph, types=types)

    def typed(cls: IRI) -> Set[Term]:
        return {n for n, ts in types.items() if cls in ts}

    def subjects(p: IRI) -> Set[Term]:
        return {t.subject for t in graph.triples(p=p)}

    def objects(p: IRI) -> Set[Term]:
        return {t.object for t in graph.triples(p=p) if not isinstance(t.object, Literal)}

    # criteria
    crit_nodes = typed(SiS.QualityCriteria) | objects(SiS.hasQualityCriteria)
    for node in _sorted(crit_nodes):
        kind, inst, lit = _description(graph, vocab, node)
        bundle.criteria[node] = QualityCriterion(
            id=node, kind=kind if isinstance(kind, IRI) else None, value=decode_number(lit),
            instance_description=inst, literal=lit if isinstance(lit, Literal) else None)

    for node in _sorted(typed(VDI.Simulation) | subjects(SiS.hasQualityCriteria)):
        crits = [bundle.criteria[c] for c in _sorted(graph.objects(node, SiS.hasQualityCriteria))
                 if c in bundle.criteria]
        bundle.simulations[node] = SimulationRecord(
            id=node, provides=frozenset(graph.objects(node, CSS.providesCapability)), criteria=crits)

    proc_nodes = (typed(CSS.Process) | subjects(CSS.requiresCapability)
                  | subjects(VDI.hasProcessQuantity) | subjects(VDI.hasResultsData))
    for node in _sorted(proc_nodes):
        bundle.processes[node] = ProcessRecord(
            id=node,
            requires=frozenset(graph.objects(node, CSS.requiresCapability)),
            inputs=frozenset(o for o in graph.objects(node, VDI.hasProcessQuantity)
                             if not isinstance(o, Literal)),
            outputs=frozenset(o for o in graph.objects(node, VDI.hasResultsData)
                              if not isinstance(o, Literal)),
            interdependencies=frozenset(graph.objects(node, ParX.hasApplication)),
        )

    cap_nodes = typed(CSS.Capability) | objects(CSS.requiresCapability) | objects(CSS.providesCapability)
    for node in _sorted(cap_nodes):
        bundle.capabilities[node] = CapabilityRecord(
            id=node,
            provided_by=frozenset(graph.subjects(CSS.providesCapability, node)),
            required_by=frozenset(graph.subjects(CSS.requiresCapability, node)),
        )

    par_nodes = (typed(VDI.Data) | objects(VDI.hasProcessQuantity) | objects(VDI.hasResultsData)
                 | subjects(SiS.hasInfluence))
    for node in _sorted(par_nodes):
        element = graph.value(node, DIN.hasDataElement)
        rec = ParameterRecord(id=node, data_element=element)
        if element is not None:
            td, inst, lit = _description(graph, vocab, element)
            rec.type_description, rec.instance_description = td, inst
            if isinstance(lit, Literal):
                rec.literal = lit
                num = decode_number(lit)
                rec.instance_value = num if num is not None else lit.lexical
        bundle.parameters[node] = rec

    for node in _sorted(typed(SiS.Influence) | objects(SiS.hasInfluence)):
        ts = types.get(node, frozenset())
        if SiS.SensitivityIndex in ts:
            kind = SENSITIVITY_INDEX
        elif SiS.InfluenceScore in ts:
            kind = INFLUENCE_SCORE
        elif SiS.Interdependency in ts:
            kind = INTERDEPENDENCY
        else:
            kind = None
        td, inst, lit = _description(graph, vocab, node)
        sources = _sorted(graph.subjects(SiS.hasInfluence, node))
        bundle.influences[node] = InfluenceRecord(
            id=node, kind=kind, source=sources[0] if sources else None,
            target_process=graph.value(node, SiS.isInfluenceFor),
            target_element=graph.value(node, SiS.hasInfluenceOn),
            value=decode_number(lit), type_description=td, instance_description=inst,
            literal=lit if isinstance(lit, Literal) else None,
        )
    return bundle


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    rule: str
    focus: Term
    message: str
    severity: str = ERROR

    def to_dict(self, prefixes: Optional[PrefixMap] = None) -> dict:
        focus = prefixes.format(self.focus) if prefixes is not None else self.focus.n3()
        return {"rule": self.rule, "focus": focus, "message": self.message,
                "severity": self.severity}

    def to_text(self, prefixes: Optional[PrefixMap] = None) -> str:
        d = self.to_dict(prefixes)
        return f"{d['severity'].upper():7} {d['rule']} {d['focus']}: {d['message']}"


def violations_to_jsonl(violations: Iterable[Violation], prefixes: Optional[PrefixMap] = None) -> str:
    return "".join(json.dumps(v.to_dict(prefixes), sort_keys=True) + "\n" for v in violations)


@dataclass
class InfluenceGroup:
    process: Term
    element: Optional[Term]
    members: List[InfluenceRecord]

    @property
    def total(self) -> float:
        return sum(m.value for m in self.members if m.value is not None)


def influence_groups(bundle: ModelBundle) -> Tuple[List[InfluenceGroup], List[InfluenceRecord]]:
    """Group numeric influences by (process, influenced element).

    An influence without ``isInfluenceFor`` is attributed to the single process
    consuming its source parameter; when that is ambiguous or impossible it is
    returned in the second list instead.
    """
    groups: Dict[Tuple[Term, Optional[Term]], List[InfluenceRecord]] = defaultdict(list)
    ungroupable: List[InfluenceRecord] = []
    for inf in bundle.influences.values():
        if inf.kind not in NUMERIC_INFLUENCE_KINDS:
            continue
        process = inf.target_process
        if process is None:
            consumers = [p.id for p in bundle.consumers_of(inf.source)] if inf.source else []
            if len(consumers) != 1:
                ungroupable.append(inf)
                continue
            process = consumers[0]
        groups[(process, inf.target_element)].append(inf)
    out = [InfluenceGroup(p, e, m) for (p, e), m in groups.items()]
    out.sort(key=lambda g: (sort_key(g.process), sort_key(g.element) if g.element else (-1, "")))
    return out, ungroupable


def influence_group_sums(bundle: ModelBundle) -> Dict[Tuple[Term, Optional[Term]], float]:
    groups, _ = influence_groups(bundle)
    return {(g.process, g.element): g.total for g in groups}


def validate(graph: Graph, vocab: Optional[Vocabulary] = None,
             axioms: Optional[SchemaAxioms] = None,
             bundle: Optional[ModelBundle] = None) -> List[Violation]:
    """Check the model rules. An empty list means the graph is consistent.

    V1 domain/range, V2 influence value range, V3 influence sums per process,
    V4 criterion values, V5 unprovided capabilities (warning), V6 ill-typed
    literals.
    """
    vocab = vocab or Vocabulary.from_prefixes(graph.prefixes)
    axioms = axioms or SchemaAxioms.default(vocab)
    if bundle is None:
        bundle = extract_records(graph, vocab, axioms)
    px = graph.prefixes
    out: List[Violation] = []

    # V1
    for prop in sorted(axioms.domain_range, key=sort_key):
        dom, rng = axioms.domain_range[prop]
        for t in sorted(graph.triples(p=prop), key=lambda t: (sort_key(t.subject), sort_key(t.object))):
            if not bundle.is_a(t.subject, dom):
                out.append(Violation("V1", t.subject,
                                     f"subject of {px.compact(prop)} must be a {px.compact(dom)}"))
            if isinstance(t.object, Literal) or not bundle.is_a(t.object, rng):
                out.append(Violation("V1", t.object,
                                     f"object of {px.compact(prop)} must be a {px.compact(rng)}"))

    # V2
    for inf in bundle.influences.values():
        if inf.kind in NUMERIC_INFLUENCE_KINDS and inf.value is not None \
                and not 0.0 <= inf.value <= 1.0:
            out.append(Violation("V2", inf.id, f"influence value {inf.value:g} outside [0, 1]"))
        if inf.kind == INTERDEPENDENCY and inf.value is not None:
            out.append(Violation("V2", inf.id, "interdependency carries a numeric value; "
                                 "it is treated as an opaque reference", WARNING))

    # V3
    groups, ungroupable = influence_groups(bundle)
    for inf in ungroupable:
        out.append(Violation("V3", inf.id, "ungroupable influence: no isInfluenceFor and no "
                             "unique consuming process of its source parameter", WARNING))
    for inf in bundle.influences.values():
        if inf.kind in NUMERIC_INFLUENCE_KINDS and inf.value is None:
            out.append(Violation("V3", inf.id, "influence has no numeric value"))
    for g in groups:
        total = g.total
        if abs(total - 1.0) > SUM_TOLERANCE:
            where = f" on {px.format(g.element)}" if g.element is not None else ""
            out.append(Violation("V3", g.process,
                                 f"influence values{where} sum to {round(total, 9):g}, expected 1"))

    # V4
    for crit in bundle.criteria.values():
        if crit.instance_description is None:
            out.append(Violation("V4", crit.id, "quality criterion has no instance description"))
        elif crit.value is None:
            out.append(Violation("V4", crit.id, "quality criterion has no parseable numeric value"))

    # V5
    for cap in bundle.capabilities.values():
        if cap.required_by and not any(s in bundle.simulations for s in cap.provided_by):
            out.append(Violation("V5", cap.id, "required capability is not provided by any "
                                 "simulation", WARNING))

    # V6
    for t in graph:
        o = t.object
        if isinstance(o, Literal) and o.datatype is not None and not o.well_typed():
            out.append(Violation("V6", t.subject,
                                 f"ill-typed literal {o.lexical!r} for {px.compact(o.datatype)}"))

    out.sort(key=lambda v: (v.rule, sort_key(v.focus), v.message))
    return out


def error_count(violations: Iterable[Violation]) -> int:
    return sum(1 for v in violations if v.severity == ERROR)
