"""Random model generators and brute-force oracles shared by the test modules.

The oracles deliberately avoid the package's indexes, matchmaker and planner:
they work on raw triple lists so that agreement means something.
"""
from __future__ import annotations

import itertools
import random
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from sisplan import data_path
from sisplan.graph import (IRI, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, BNode,
                           Graph, Literal, Term, Triple, TriplePattern, Variable)
from sisplan.matchmaker import inputs_of, influences_on, quality_criteria_of, simulations_for_output
from sisplan.planner import GoalUnreachable, PlanRequest, enumerate_plans
from sisplan.schema import extract_records
from sisplan.sparql import SelectQuery, run_query
from sisplan.vocab import DEFAULT_NAMESPACES, Vocabulary

V = Vocabulary()
CSS, VDI, DIN, SIS, PARX = V.CSS, V.VDI3633, V.DINEN61360, V.SiS, V.ParX

RTM = "http://example.org/rtm#"
GEN = "http://example.org/gen#"

FIXTURE = data_path("rtm_infiltration.ttl")
EXTENSION = data_path("rtm_extension.ttl")
QUERY_DIR = data_path("queries")


def rtm(name: str) -> IRI:
    return IRI(RTM + name)


def gen(name: str) -> IRI:
    return IRI(GEN + name)


def dec(x: float) -> Literal:
    return Literal(repr(round(x, 3)), XSD_DECIMAL)


def stored_query(name: str) -> str:
    return (QUERY_DIR / name).read_text(encoding="utf-8")


# -- random vocabulary-conformant models ------------------------------------

def _partition(rng: random.Random, k: int) -> List[float]:
    """k values in (0, 1] with three decimals that add up to exactly 1."""
    raw = [rng.randint(1, 10) for _ in range(k)]
    total = sum(raw)
    vals = [round(r / total, 3) for r in raw[:-1]]
    vals.append(round(1 - sum(vals), 3))
    return vals


def random_model_graph(rng: random.Random, max_processes: int = 6, max_params: int = 8,
                       max_sims_per_cap: int = 3, untyped_rate: float = 0.08) -> Graph:
    """A random CSS / VDI 3633 / SiS model.

    Processes require capabilities provided by simulations; parameters flow
    between processes. Self loops and cycles occur with some probability.
    """
    g = Graph(prefixes={**{k: v for k, v in DEFAULT_NAMESPACES.items()}, "ex": GEN})
    n_params = rng.randint(2, max_params)
    n_procs = rng.randint(1, max_processes)
    params = [gen(f"P{i}") for i in range(n_params)]
    caps = [gen(f"C{i}") for i in range(rng.randint(1, n_procs))]
    for p in params:
        g.add(p, RDF_TYPE, VDI.Data)
    sims: List[IRI] = []
    for c in caps:
        if rng.random() > untyped_rate:
            g.add(c, RDF_TYPE, CSS.Capability)
        for _ in range(rng.randint(0, max_sims_per_cap)):
            if sims and rng.random() < 0.25:
                s = rng.choice(sims)
                if len(list(g.subjects(CSS.providesCapability, c))) >= max_sims_per_cap:
                    continue
            else:
                s = gen(f"S{len(sims)}")
                sims.append(s)
            g.add(s, CSS.providesCapability, c)
    for s in sims:
        if rng.random() > untyped_rate:
            g.add(s, RDF_TYPE, VDI.Simulation)
        if rng.random() < 0.9:
            crit = gen(f"Acc_{s.local_name}")
            g.add(s, SIS.hasQualityCriteria, crit)
            g.add(crit, RDF_TYPE, SIS.QualityCriteria)
            g.add(crit, DIN.hasTypeDescription, gen("ResultAccuracy"))
            g.add(crit, DIN.hasInstanceDescription, gen(f"Acc_{s.local_name}_ID"))
            g.add(gen(f"Acc_{s.local_name}_ID"), DIN.value, dec(rng.randint(0, 100) / 100))
        if rng.random() < 0.5:
            crit = gen(f"Time_{s.local_name}")
            g.add(s, SIS.hasQualityCriteria, crit)
            g.add(crit, RDF_TYPE, SIS.QualityCriteria)
            g.add(crit, DIN.hasTypeDescription, gen("SimulationTime"))
            g.add(crit, DIN.hasInstanceDescription, gen(f"Time_{s.local_name}_ID"))
            g.add(gen(f"Time_{s.local_name}_ID"), DIN.value, dec(rng.randint(1, 50) / 10))
    if sims:
        g.add(gen("ResultAccuracy"), RDF_TYPE, DIN.TypeDescription)
    for i in range(n_procs):
        pr = gen(f"Pr{i}")
        g.add(pr, RDF_TYPE, CSS.Process)
        for c in rng.sample(caps, 2 if len(caps) > 1 and rng.random() < 0.15 else 1):
            g.add(pr, CSS.requiresCapability, c)
        inputs = rng.sample(params, rng.randint(0, min(3, n_params)))
        outputs = rng.sample(params, rng.randint(1, min(2, n_params)))
        for p in inputs:
            g.add(pr, VDI.hasProcessQuantity, p)
        for p in outputs:
            g.add(pr, VDI.hasResultsData, p)
        if inputs and rng.random() < 0.8:
            for p, w in zip(inputs, _partition(rng, len(inputs))):
                inf = gen(f"Inf_{pr.local_name}_{p.local_name}")
                g.add(p, SIS.hasInfluence, inf)
                g.add(inf, RDF_TYPE, SIS.InfluenceScore)
                g.add(inf, SIS.isInfluenceFor, pr)
                g.add(inf, DIN.hasInstanceDescription, IRI(inf.value + "_ID"))
                g.add(IRI(inf.value + "_ID"), DIN.value, dec(w))
    return g


def random_plain_graph(rng: random.Random, max_triples: int = 30, n_nodes: int = 5,
                       n_preds: int = 3, literals: bool = True, bnodes: bool = True) -> Graph:
    nodes: List[Term] = [gen(f"n{i}") for i in range(n_nodes)]
    if bnodes:
        nodes.append(BNode("b0"))
    preds = [gen(f"p{i}") for i in range(n_preds)]
    objs: List[Term] = list(nodes)
    if literals:
        objs += [Literal("x"), Literal("1", XSD_DECIMAL), Literal("hi", language="en")]
    g = Graph(prefixes={"ex": GEN})
    for _ in range(rng.randint(0, max_triples)):
        g.add(rng.choice(nodes), rng.choice(preds), rng.choice(objs))
    return g


def random_patterns(rng: random.Random, graph_terms: Tuple[list, list, list],
                    max_patterns: int = 4, n_vars: int = 3) -> List[TriplePattern]:
    subjects, preds, objects = graph_terms
    vars_ = [Variable(f"v{i}") for i in range(n_vars)]
    pats = []
    for _ in range(rng.randint(1, max_patterns)):
        s = rng.choice(vars_) if rng.random() < 0.7 else rng.choice(subjects)
        p = rng.choice(vars_) if rng.random() < 0.3 else rng.choice(preds)
        o = rng.choice(vars_) if rng.random() < 0.7 else rng.choice(objects)
        pats.append(TriplePattern(s, p, o))
    return pats


# -- query oracle -----------------------------------------------------------

def _graph_terms(graph):
    subs = sorted({t.subject for t in graph}, key=lambda t: t.n3()) or [IRI("http://x.org/a")]
    preds = sorted({t.predicate for t in graph}, key=lambda t: t.n3()) or [IRI("http://x.org/p")]
    objs = sorted({t.object for t in graph}, key=lambda t: t.n3()) or [IRI("http://x.org/o")]
    return subs, preds, objs


def random_select_query(rng: random.Random, graph: Graph):
    """A basic graph pattern over terms of ``graph`` with a random projection."""
    pats = random_patterns(rng, _graph_terms(graph))
    vars_ = []
    for p in pats:
        for v in p.variables():
            if v not in vars_:
                vars_.append(v)
    projected = [v for v in vars_ if rng.random() < 0.7] or vars_[:1]
    if not projected:
        pats.append(TriplePattern(Variable("v0"), Variable("v1"), Variable("v2")))
        projected = ["v0"]
    return SelectQuery(projected, pats)


def _unify(pattern: TriplePattern, triple: Triple, binding: Dict[str, Term]) -> Optional[Dict[str, Term]]:
    out = dict(binding)
    for pt, tt in zip(pattern, triple):
        if isinstance(pt, Variable):
            if pt.name in out and out[pt.name] != tt:
                return None
            out[pt.name] = tt
        elif pt != tt:
            return None
    return out


def naive_solutions(triples: List[Triple], patterns: List[TriplePattern]) -> List[Dict[str, Term]]:
    """Every assignment of patterns to triples, kept when the bindings agree."""
    sols = []
    for combo in itertools.product(triples, repeat=len(patterns)):
        b: Optional[Dict[str, Term]] = {}
        for pat, t in zip(patterns, combo):
            b = _unify(pat, t, b)
            if b is None:
                break
        if b is not None:
            sols.append(b)
    return sols


def naive_rows(graph: Graph, patterns: List[TriplePattern], projected: List[str]):
    triples = sorted(graph, key=lambda t: t.n3())
    return sorted((tuple(s[v] for v in projected) for s in naive_solutions(triples, patterns)),
                  key=lambda row: tuple(t.n3() for t in row))


def naive_match(graph: Graph, pattern: TriplePattern) -> List[Dict[str, Term]]:
    return [b for t in list(graph) if (b := _unify(pattern, t, {})) is not None]


# -- planner oracle ---------------------------------------------------------

def _objects(triples: Iterable[Triple], s, p) -> Set[Term]:
    return {t.object for t in triples if t.subject == s and t.predicate == p}


def _typed(triples, node, cls) -> bool:
    return any(t.subject == node and t.predicate == RDF_TYPE and t.object == cls for t in triples)


def raw_options(graph: Graph) -> Tuple[Dict[Term, Set[Tuple[Term, Term]]], Dict[Term, Set[Term]]]:
    """param -> {(process, simulation)} and process -> inputs, straight from the triples."""
    triples = list(graph)
    inputs: Dict[Term, Set[Term]] = {}
    options: Dict[Term, Set[Tuple[Term, Term]]] = {}
    procs = {t.subject for t in triples
             if t.predicate in (VDI.hasResultsData, VDI.hasProcessQuantity, CSS.requiresCapability)}
    for pr in procs:
        inputs[pr] = _objects(triples, pr, VDI.hasProcessQuantity)
        caps = [c for c in _objects(triples, pr, CSS.requiresCapability)
                if _typed(triples, c, CSS.Capability)]
        sims = {(pr, t.subject) for t in triples
                if t.predicate == CSS.providesCapability and t.object in caps
                and _typed(triples, t.subject, VDI.Simulation)}
        for out in _objects(triples, pr, VDI.hasResultsData):
            options.setdefault(out, set()).update(sims)
    return options, inputs


def brute_force_plans(graph: Graph, goal: Term, known: FrozenSet[Term]) -> Set[FrozenSet[Tuple[Term, Term]]]:
    """All node sets of valid plans, by trying every producer assignment.

    Each parameter that is not known gets either no producer or one of its
    (process, simulation) options. An assignment is a plan when the goal is
    assigned, every assigned producer's inputs are known or assigned, every
    assigned parameter is needed by the goal, and no parameter depends on
    itself.
    """
    if goal in known:
        return {frozenset()}
    options, inputs = raw_options(graph)
    params = sorted((p for p in options if p not in known and options[p]), key=lambda t: t.n3())
    if goal not in params:
        return set()
    choices = [[None] + sorted(options[p], key=lambda o: (o[0].n3(), o[1].n3())) for p in params]
    plans = set()
    for combo in itertools.product(*choices):
        assign = {p: c for p, c in zip(params, combo) if c is not None}
        if goal not in assign:
            continue
        needs = {p: [q for q in inputs[assign[p][0]] if q not in known] for p in assign}
        if any(q not in assign for qs in needs.values() for q in qs):
            continue
        reach, stack = set(), [goal]
        while stack:
            x = stack.pop()
            if x not in reach:
                reach.add(x)
                stack.extend(needs[x])
        if reach != set(assign):
            continue
        if _has_cycle(needs):
            continue
        plans.add(frozenset(assign.values()))
    return plans


def _has_cycle(edges: Dict[Term, List[Term]]) -> bool:
    state: Dict[Term, int] = {}

    def visit(n) -> bool:
        state[n] = 1
        for m in edges.get(n, ()):
            if state.get(m) == 1 or (state.get(m) is None and visit(m)):
                return True
        state[n] = 2
        return False

    return any(state.get(n) is None and visit(n) for n in list(edges))


def option_space(graph: Graph, known: FrozenSet[Term]) -> int:
    options, _ = raw_options(graph)
    size = 1
    for p, opts in options.items():
        if p not in known and opts:
            size *= len(opts) + 1
    return size


def check_plan(graph: Graph, dag, known: FrozenSet[Term]) -> List[str]:
    """Independent structural check of a PlanDag against the raw triples."""
    triples = list(graph)
    problems = []
    for key, node in dag.nodes.items():
        if key != (node.process, node.simulation):
            problems.append(f"bad key {key}")
        if not any(t.subject == node.process and t.predicate == CSS.requiresCapability
                   and t.object == node.capability for t in triples):
            problems.append(f"{node.process} does not require {node.capability}")
        if not any(t.subject == node.simulation and t.predicate == CSS.providesCapability
                   and t.object == node.capability for t in triples):
            problems.append(f"{node.simulation} does not provide {node.capability}")
        ins = _objects(triples, node.process, VDI.hasProcessQuantity)
        if set(node.consumed_known) | set(node.consumed_produced) != ins:
            problems.append(f"input coverage of {key}")
        if not set(node.consumed_known) <= set(known):
            problems.append(f"unknown input marked known at {key}")
        for p, prod in node.consumed_produced.items():
            if p in known:
                problems.append(f"known parameter {p} simulated")
            if prod not in dag.nodes or p not in dag.nodes[prod].produced:
                problems.append(f"{prod} does not produce {p}")
    if dag.nodes:
        if dag.goal not in dag.nodes[dag.root].produced:
            problems.append("root does not produce goal")
        reach, stack = set(), [dag.root]
        while stack:
            k = stack.pop()
            if k not in reach:
                reach.add(k)
                stack.extend(dag.nodes[k].consumed_produced.values())
        if reach != set(dag.nodes):
            problems.append("unreachable nodes")
        edges = {k: list(n.consumed_produced.values()) for k, n in dag.nodes.items()}
        if _has_cycle(edges):
            problems.append("cycle")
    return problems


def replay(order, known: FrozenSet[Term]) -> bool:
    """Run a schedule: every consumed parameter must already be available."""
    available = set(known)
    for node in order:
        if any(p not in available for p in node.consumed_produced):
            return False
        if not set(node.consumed_known) <= available:
            return False
        available |= set(node.produced)
    return True


# -- turtle round-trip graphs ------------------------------------------------

_LEXICALS = ["", "plain", "with \"quotes\"", "back\\slash", "line\nbreak", "tab\tand\rcr",
             "unicode é中\U0001F600", "'single'", "trailing space ", "#not a comment"]


def _random_literal(rng: random.Random) -> Literal:
    kind = rng.randrange(6)
    if kind == 0:
        return Literal(rng.choice(_LEXICALS))
    if kind == 1:
        return Literal(rng.choice(_LEXICALS), language=rng.choice(["en", "de-AT"]))
    if kind == 2:
        return Literal(str(rng.randint(-50, 50)), XSD_INTEGER)
    if kind == 3:
        return Literal(f"{rng.randint(-99, 99) / 10}", XSD_DECIMAL)
    if kind == 4:
        return Literal(rng.choice(["1.5e3", "2E-1", "007", " 1 "]), XSD_DOUBLE)
    return Literal(rng.choice(["true", "false", "1"]), XSD_BOOLEAN)


def _random_iri(rng: random.Random) -> IRI:
    tails = ["a", "b.c", "d-e", "f_1", "with space", "x/y#z", "ü", "end.", "1st", "q?x=1&y=2"]
    base = rng.choice(["http://example.org/x#", "http://example.org/y/", "urn:test:"])
    return IRI(base + rng.choice(tails) + str(rng.randint(0, 3)))


def random_turtle_graph(rng: random.Random) -> Graph:
    """Blank-node-free graph with awkward IRIs and literals, for round-trip checks."""
    prefixes = {"ex": "http://example.org/x#"}
    if rng.random() < 0.5:
        prefixes["y"] = "http://example.org/y/"
    g = Graph(prefixes=prefixes)
    for _ in range(rng.randint(0, 25)):
        s = _random_iri(rng)
        p = _random_iri(rng) if rng.random() < 0.8 else RDF_TYPE
        o = _random_iri(rng) if rng.random() < 0.5 else _random_literal(rng)
        g.add(s, p, o)
    return g


# -- check loops shared by the module tests and the acceptance suite ----------
# These drive the package under test and compare against the oracles above.

def _q(name: str, **constants: IRI) -> str:
    text = stored_query(name)
    for curie, iri in constants.items():
        text = text.replace(f"ex:{curie}", iri.n3())
    return text


def matchmaker_cross_check(g: Graph) -> None:
    """Typed matchmaker answers must equal the stored queries run through the engine."""
    m = extract_records(g)
    outputs = sorted({t.object for t in g.triples(p=VDI.hasResultsData)}, key=lambda t: t.n3())
    for p in outputs + [gen("Nobody")]:
        rows = run_query(g, _q("simulations_for_output.rq", LocalFillTime=p))
        typed = simulations_for_output(m, p)
        assert set(rows.tuples()) == {tuple(x) for x in typed}
    for sim in sorted(m.simulations, key=lambda t: t.n3()):
        if not m.is_a(sim, VDI.Simulation):
            continue
        rows = run_query(g, _q("quality_criteria.rq", InfiltrationSimulationDL=sim))
        typed = {(c.id, c.instance_description, c.literal) for c in quality_criteria_of(m, sim)
                 if c.instance_description is not None and c.literal is not None}
        assert set(rows.tuples()) == typed

        rows = run_query(g, _q("simulation_inputs.rq", InfiltrationSimulationDL=sim))
        assert set(rows.tuples()) == {tuple(r) for r in inputs_of(m, sim)}
        assert len(rows) == len(inputs_of(m, sim))

        rows = run_query(g, _q("parameter_influences.rq", InfiltrationSimulationDL=sim))
        served = [(cap, proc) for cap in m.simulations[sim].provides
                  for proc in g.subjects(CSS.requiresCapability, cap)]
        typed = {(cap, i.target_process, i.id, i.source, i.instance_description, i.literal)
                 for i in influences_on(m, sim) for cap, proc in served
                 if proc == i.target_process and i.instance_description is not None
                 and i.literal is not None}
        assert set(rows.tuples()) == typed


def random_planning_case(rng: random.Random):
    """A random model with a goal biased toward produced parameters and a small option space."""
    while True:
        g = random_model_graph(rng)
        params = sorted({t.object for t in g.triples(p=VDI.hasResultsData)}
                        | {t.object for t in g.triples(p=VDI.hasProcessQuantity)},
                        key=lambda t: t.n3())
        produced = [t.object for t in g.triples(p=VDI.hasResultsData)]
        goal = rng.choice(produced) if rng.random() < 0.8 else rng.choice(params)
        known = frozenset(p for p in params if p != goal and rng.random() < 0.35)
        if option_space(g, known) <= 50_000:
            return g, goal, known


def planner_oracle_agreement(n_models: int, seed: int) -> int:
    """Returns the number of models on which at least one plan exists."""
    rng = random.Random(seed)
    nonempty = 0
    for i in range(n_models):
        g, goal, known = random_planning_case(rng)
        m = extract_records(g)
        expected = brute_force_plans(g, goal, known)
        try:
            plans = enumerate_plans(m, PlanRequest(goal, known))
        except GoalUnreachable:
            plans = []
        got = {d.node_set() for d in plans}
        assert got == expected, f"model {i}"
        assert len(plans) == len(got)
        for d in plans:
            assert check_plan(g, d, known) == []
        nonempty += bool(expected)
    return nonempty


def scored_cases(rng: random.Random, n: int):
    """``n`` random planning cases that have at least one plan."""
    out = []
    while len(out) < n:
        g, goal, known = random_planning_case(rng)
        m = extract_records(g)
        try:
            plans = enumerate_plans(m, PlanRequest(goal, known))
        except GoalUnreachable:
            continue
        if plans:
            out.append((m, goal, known, plans))
    return out
