"""Simulation sequence planning.

Backward chaining from a goal parameter: every unknown input of a chosen
process must be produced by another (process, simulation) node, recursively,
until only known parameters remain. The result is a set of plan DAGs, which
are then scored against quality criteria and ranked.

Scoring conventions (configurable through :class:`ScoringConfig`):

* accuracy of a node = own accuracy x influence-weighted accuracy of its
  inputs (known inputs count as 1); ``weakest-link`` uses min() instead;
* time-like criteria add up over the nodes of a plan;
* a requirement on an accuracy criterion is passed upstream as
  ``1 - (1 - t) / max(influence, epsilon)`` clamped to [0, 1].
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .graph import IRI, Term, sort_key
from .matchmaker import STRICT, criterion_value, simulations_for_output
from .schema import InfluenceGroup, ModelBundle, influence_groups

log = logging.getLogger(__name__)

CONVEX = "convex"
WEAKEST_LINK = "weakest-link"
ACCURACY = "accuracy"
TIME = "time"
OTHER = "other"

NodeKey = Tuple[Term, Term]   # (process, simulation)

_CMP_TOL = 1e-9


class PlanningError(Exception):
    pass


class GoalUnreachable(PlanningError):
    """No plan exists; ``chain`` runs from the goal to a parameter nobody produces."""

    def __init__(self, goal: Term, chain: List[Term]):
        self.goal = goal
        self.chain = chain
        super().__init__("goal unreachable: " + " -> ".join(t.n3() for t in chain))


class CycleDetected(PlanningError):
    pass


@dataclass
class PlanRequest:
    goal: Term
    known: FrozenSet[Term] = frozenset()
    weights: Dict[Term, float] = field(default_factory=dict)
    requirements: Dict[Term, float] = field(default_factory=dict)
    limits: Dict[Term, float] = field(default_factory=dict)
    max_depth: int = 16
    max_plans: int = 1000
    match_mode: str = STRICT

    def __post_init__(self):
        self.known = frozenset(self.known)
        for k, w in self.weights.items():
            if w < 0:
                raise ValueError(f"negative weight for {k.n3()}")


@dataclass
class ScoringConfig:
    aggregator: str = CONVEX
    accuracy_kinds: Optional[FrozenSet[Term]] = None
    time_kinds: Optional[FrozenSet[Term]] = None
    epsilon: float = 0.05

    def classify(self, kind: Term) -> str:
        if self.accuracy_kinds is not None and kind in self.accuracy_kinds:
            return ACCURACY
        if self.time_kinds is not None and kind in self.time_kinds:
            return TIME
        if self.accuracy_kinds is None or self.time_kinds is None:
            name = kind.local_name if isinstance(kind, IRI) else str(kind)
            if self.accuracy_kinds is None and "accuracy" in name.lower():
                return ACCURACY
            if self.time_kinds is None and name.lower().endswith("time"):
                return TIME
        return OTHER


@dataclass
class PlanNode:
    simulation: Term
    process: Term
    capability: Term
    consumed_known: FrozenSet[Term]
    consumed_produced: Dict[Term, NodeKey]
    produced: FrozenSet[Term]

    @property
    def key(self) -> NodeKey:
        return (self.process, self.simulation)


@dataclass
class PlanDag:
    goal: Term
    root: Optional[NodeKey]
    nodes: Dict[NodeKey, PlanNode]

    @property
    def edges(self) -> List[Tuple[NodeKey, NodeKey, Term]]:
        out = []
        for node in self.nodes.values():
            for param, producer in node.consumed_produced.items():
                out.append((producer, node.key, param))
        return sorted(out, key=lambda e: (_key_sort(e[0]), _key_sort(e[1]), sort_key(e[2])))

    def node_set(self) -> FrozenSet[NodeKey]:
        return frozenset(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    @property
    def root_node(self) -> Optional[PlanNode]:
        return self.nodes[self.root] if self.root is not None else None


def _key_sort(key: NodeKey):
    return (sort_key(key[1]), sort_key(key[0]))


@dataclass
class PlanEnumeration:
    plans: List[PlanDag]
    depth_exceeded: bool = False
    plan_limit_reached: bool = False

    def __iter__(self):
        return iter(self.plans)

    def __len__(self) -> int:
        return len(self.plans)

    def __getitem__(self, i):
        return self.plans[i]

    @property
    def partial(self) -> bool:
        return self.depth_exceeded or self.plan_limit_reached


class _Producers:
    """Memoized (process, simulation, capability) options per parameter."""

    def __init__(self, model: ModelBundle, mode: str):
        self.model = model
        self.mode = mode
        self._cache: Dict[Term, List[Tuple[Term, Term, Term]]] = {}

    def __call__(self, param: Term) -> List[Tuple[Term, Term, Term]]:
        if param not in self._cache:
            best: Dict[NodeKey, Term] = {}
            for m in simulations_for_output(self.model, param, self.mode):
                k = (m.process, m.simulation)
                if k not in best or sort_key(m.capability) < sort_key(best[k]):
                    best[k] = m.capability
            opts = [(p, s, c) for (p, s), c in best.items()]
            opts.sort(key=lambda o: (sort_key(o[0]), sort_key(o[1])))
            self._cache[param] = opts
        return self._cache[param]

    def inputs(self, process: Term) -> List[Term]:
        return sorted(self.model.processes[process].inputs, key=sort_key)


def _resolvable(producers: _Producers, known: FrozenSet[Term], candidates: Iterable[Term]) -> Set[Term]:
    """Least fixpoint: known, or produced by some option whose inputs are all resolvable."""
    model = producers.model
    params = set(candidates) | set(model.parameters)
    for proc in model.processes.values():
        params |= proc.inputs | proc.outputs
    ok = set(p for p in params if p in known)
    changed = True
    while changed:
        changed = False
        for p in params:
            if p in ok:
                continue
            for proc, _, _ in producers(p):
                if all(q in ok for q in producers.inputs(proc)):
                    ok.add(p)
                    changed = True
                    break
    return ok


def _blocking_chain(producers: _Producers, known, resolvable: Set[Term], goal: Term) -> List[Term]:
    chain = [goal]
    p = goal
    while True:
        opts = producers(p)
        if not opts:
            return chain
        proc = opts[0][0]
        bad = [q for q in producers.inputs(proc) if q not in resolvable]
        q = bad[0]
        if q in chain:
            return chain + [q]
        chain.append(q)
        p = q


def _reaches(deps: Mapping[Term, Sequence[Term]], start: Term, target: Term) -> bool:
    stack, seen = [start], set()
    while stack:
        x = stack.pop()
        if x == target:
            return True
        if x in seen:
            continue
        seen.add(x)
        stack.extend(deps.get(x, ()))
    return False


def _build_dag(producers: _Producers, goal: Term, known: FrozenSet[Term],
               assignment: Mapping[Term, Tuple[Term, Term, Term]]) -> PlanDag:
    model = producers.model
    nodes: Dict[NodeKey, PlanNode] = {}
    for param in sorted(assignment, key=sort_key):
        proc, sim, cap = assignment[param]
        key = (proc, sim)
        if key in nodes:
            continue
        inputs = model.processes[proc].inputs
        consumed_known = frozenset(q for q in inputs if q in known)
        consumed_produced = {q: assignment[q][:2] for q in sorted(inputs, key=sort_key)
                             if q not in known}
        nodes[key] = PlanNode(sim, proc, cap, consumed_known, consumed_produced,
                              model.processes[proc].outputs)
    root = assignment[goal][:2]
    return PlanDag(goal, root, nodes)


def enumerate_plans(model: ModelBundle, request: PlanRequest) -> PlanEnumeration:
    """All plan DAGs producing ``request.goal`` from ``request.known``.

    Every unknown parameter in a plan has exactly one producing node, plans
    are acyclic, and a parameter already on the resolution path is never
    re-resolved. Plans with the same node set are reported once, in the
    wiring found first. Raises :class:`GoalUnreachable` when no plan can exist.
    """
    goal, known = request.goal, request.known
    if goal in known:
        return PlanEnumeration([PlanDag(goal, None, {})])
    producers = _Producers(model, request.match_mode)
    resolvable = _resolvable(producers, known, [goal])
    if goal not in resolvable:
        raise GoalUnreachable(goal, _blocking_chain(producers, known, resolvable, goal))

    result = PlanEnumeration([])
    seen: Set[FrozenSet[NodeKey]] = set()

    def search(pending: Tuple[Tuple[Term, int], ...], assignment: Dict, deps: Dict) -> None:
        if len(result.plans) >= request.max_plans:
            result.plan_limit_reached = True
            return
        i = 0
        while i < len(pending) and (pending[i][0] in known or pending[i][0] in assignment):
            i += 1
        if i == len(pending):
            # plans that run the same nodes and differ only in wiring count as one
            dag = _build_dag(producers, goal, known, assignment)
            if dag.node_set() not in seen:
                seen.add(dag.node_set())
                result.plans.append(dag)
            return
        param, depth = pending[i]
        rest = pending[i + 1:]
        if depth > request.max_depth:
            result.depth_exceeded = True
            return
        for proc, sim, cap in producers(param):
            needs = [q for q in producers.inputs(proc) if q not in known]
            if any(q not in resolvable for q in needs):
                continue
            if any(q == param or _reaches(deps, q, param) for q in needs):
                continue
            assignment[param] = (proc, sim, cap)
            deps[param] = needs
            search(rest + tuple((q, depth + 1) for q in needs), assignment, deps)
            del assignment[param]
            del deps[param]
            if result.plan_limit_reached:
                return

    search(((goal, 0),), {}, {})
    if result.depth_exceeded:
        log.warning("plan search hit max depth %d; results are partial", request.max_depth)
    if result.plan_limit_reached:
        log.warning("plan search stopped after %d plans", request.max_plans)
    return result


def topological_order(dag: PlanDag) -> List[PlanNode]:
    """Producers before consumers; ready nodes taken in simulation-IRI order."""
    indeg = {k: 0 for k in dag.nodes}
    consumers: Dict[NodeKey, Set[NodeKey]] = {k: set() for k in dag.nodes}
    for producer, consumer, _ in dag.edges:
        if consumer not in consumers[producer]:
            consumers[producer].add(consumer)
            indeg[consumer] += 1
    heap = [(_key_sort(k), k) for k, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, k = heapq.heappop(heap)
        order.append(dag.nodes[k])
        for c in consumers[k]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, (_key_sort(c), c))
    if len(order) != len(dag.nodes):
        raise CycleDetected("plan graph contains a cycle")
    return order


# -- scoring ----------------------------------------------------------------

@dataclass
class ScoreCard:
    per_criterion: Dict[Term, Optional[float]]
    effective_accuracy: float
    total_time_like: float
    weighted_score: float
    propagated_requirements: Dict[Tuple[NodeKey, Term], float] = field(default_factory=dict)
    node_accuracy: Dict[NodeKey, Dict[Term, float]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    # criterion kinds recorded on at least one node of the plan
    present: FrozenSet[Term] = frozenset()


class Scorer:
    """Scores plans of one model; caches influence groups across plans."""

    def __init__(self, model: ModelBundle, config: Optional[ScoringConfig] = None):
        self.model = model
        self.config = config or ScoringConfig()
        groups, _ = influence_groups(model)
        self._groups: Dict[Term, List[InfluenceGroup]] = {}
        for g in groups:
            self._groups.setdefault(g.process, []).append(g)

    def input_weights(self, process: Term, simulation: Term, kind: Optional[Term],
                      warnings: Optional[List[str]] = None) -> Dict[Term, float]:
        inputs = sorted(self.model.processes[process].inputs, key=sort_key)
        groups = self._groups.get(process, [])
        if not groups:
            if len(inputs) > 1 and warnings is not None:
                warnings.append(f"no influence records for {self._fmt(process)}; "
                                f"inputs weighted uniformly")
            return {q: 1.0 / len(inputs) for q in inputs} if inputs else {}
        chosen = None
        if len(groups) > 1:
            rec = self.model.simulations.get(simulation)
            own = {c.id for c in rec.criteria if c.kind == kind} if rec else set()
            chosen = next((g for g in groups if g.element in own), None)
            if chosen is None:
                chosen = next((g for g in groups if g.element is None), None)
        chosen = chosen or groups[0]
        weights = {q: 0.0 for q in inputs}
        for inf in chosen.members:
            if inf.source in weights and inf.value is not None:
                weights[inf.source] += inf.value
        return weights

    def _fmt(self, term: Term) -> str:
        return self.model.prefixes.format(term)

    def kinds_in(self, dag: PlanDag) -> List[Term]:
        kinds = set()
        for node in dag.nodes.values():
            rec = self.model.simulations.get(node.simulation)
            if rec:
                kinds.update(c.kind for c in rec.criteria if c.kind is not None)
        return sorted(kinds, key=sort_key)

    def node_accuracies(self, dag: PlanDag, kind: Term, warnings: List[str]) -> Dict[NodeKey, float]:
        acc: Dict[NodeKey, float] = {}
        for node in topological_order(dag):
            own = criterion_value(self.model, node.simulation, kind)
            if own is None:
                own = 1.0
                warnings.append(f"{self._fmt(node.simulation)} has no {self._fmt(kind)} value; "
                                f"assuming 1.0")
            inputs = self.model.processes[node.process].inputs
            incoming = {q: (acc[node.consumed_produced[q]] if q in node.consumed_produced else 1.0)
                        for q in inputs}
            if self.config.aggregator == WEAKEST_LINK:
                acc[node.key] = min([own] + list(incoming.values()))
            elif not inputs:
                acc[node.key] = own
            else:
                w = self.input_weights(node.process, node.simulation, kind, warnings)
                acc[node.key] = own * sum(w[q] * incoming[q] for q in incoming)
        return acc

    def normalized(self, kind: Term, value: Optional[float]) -> float:
        cls = self.config.classify(kind)
        if value is None:
            return 0.0
        if cls == TIME:
            return 1.0 / (1.0 + value)
        return value

    def score(self, dag: PlanDag, request: PlanRequest) -> ScoreCard:
        warnings: List[str] = []
        present = self.kinds_in(dag)
        kinds = sorted(set(present) | set(request.weights) | set(request.requirements)
                       | set(request.limits), key=sort_key)
        per: Dict[Term, Optional[float]] = {}
        node_acc: Dict[NodeKey, Dict[Term, float]] = {k: {} for k in dag.nodes}
        for kind in kinds:
            cls = self.config.classify(kind)
            if cls == ACCURACY:
                if dag.is_empty:
                    per[kind] = 1.0
                    continue
                accs = self.node_accuracies(dag, kind, warnings if kind in present else [])
                for k, v in accs.items():
                    node_acc[k][kind] = v
                per[kind] = accs[dag.root]
            elif cls == TIME:
                per[kind] = sum(criterion_value(self.model, n.simulation, kind) or 0.0
                                for n in dag.nodes.values())
            else:
                vals = [criterion_value(self.model, n.simulation, kind) for n in dag.nodes.values()]
                vals = [v for v in vals if v is not None]
                per[kind] = min(vals) if vals else None
        acc_kinds = [k for k in kinds if self.config.classify(k) == ACCURACY]
        primary = next((k for k in acc_kinds if k in present), acc_kinds[0] if acc_kinds else None)
        effective = per[primary] if primary is not None else 1.0
        total_time = sum(per[k] for k in kinds if self.config.classify(k) == TIME)
        weighted = sum(w * self.normalized(k, per.get(k)) for k, w in request.weights.items())
        card = ScoreCard(per, effective, total_time, weighted, node_accuracy=node_acc,
                         warnings=list(dict.fromkeys(warnings)), present=frozenset(present))
        card.propagated_requirements = self.propagate(dag, request)
        return card

    def propagate(self, dag: PlanDag, request: PlanRequest) -> Dict[Tuple[NodeKey, Term], float]:
        if dag.is_empty:
            return {}
        eps = self.config.epsilon
        out: Dict[Tuple[NodeKey, Term], float] = {}
        order = topological_order(dag)
        for kind in sorted(request.requirements, key=sort_key):
            out[(dag.root, kind)] = request.requirements[kind]
            if self.config.classify(kind) != ACCURACY:
                continue
            thr: Dict[NodeKey, float] = {dag.root: request.requirements[kind]}
            for node in reversed(order):
                if node.key not in thr:
                    continue
                w = self.input_weights(node.process, node.simulation, kind)
                for param, producer in node.consumed_produced.items():
                    influence = w.get(param, 0.0)
                    child = 1.0 - (1.0 - thr[node.key]) / max(influence, eps)
                    child = min(1.0, max(0.0, child))
                    thr[producer] = max(thr.get(producer, 0.0), child)
            for key, value in thr.items():
                out[(key, kind)] = value
        return out


def score_plan(model: ModelBundle, dag: PlanDag, request: PlanRequest,
               config: Optional[ScoringConfig] = None) -> ScoreCard:
    return Scorer(model, config).score(dag, request)


def propagate_requirements(model: ModelBundle, dag: PlanDag, request: PlanRequest,
                           config: Optional[ScoringConfig] = None
                           ) -> Dict[Tuple[NodeKey, Term], float]:
    return Scorer(model, config).propagate(dag, request)


# -- ranking ----------------------------------------------------------------

@dataclass
class Violated:
    criterion: Term
    node: Optional[NodeKey]
    value: Optional[float]
    threshold: float
    bound: str = ">="


@dataclass
class RankedPlan:
    dag: PlanDag
    score: ScoreCard
    violations: List[Violated]

    @property
    def feasible(self) -> bool:
        return not self.violations


def check_requirements(dag: PlanDag, card: ScoreCard, request: PlanRequest,
                       config: Optional[ScoringConfig] = None) -> List[Violated]:
    config = config or ScoringConfig()
    out: List[Violated] = []
    for (key, kind), threshold in sorted(card.propagated_requirements.items(),
                                         key=lambda kv: (_key_sort(kv[0][0]), sort_key(kv[0][1]))):
        if kind not in card.present:
            # nothing in the plan records this criterion, so there is nothing to hold it to
            continue
        if config.classify(kind) == ACCURACY:
            value = card.node_accuracy.get(key, {}).get(kind)
        else:
            value = card.per_criterion.get(kind)
        if value is None:
            continue
        if value < threshold - _CMP_TOL:
            out.append(Violated(kind, key, value, threshold))
    for kind in sorted(request.limits, key=sort_key):
        limit = request.limits[kind]
        value = card.per_criterion.get(kind)
        if value is not None and value > limit + _CMP_TOL:
            out.append(Violated(kind, dag.root, value, limit, "<="))
    return out


def rank_and_filter(scored: Iterable[Tuple[PlanDag, ScoreCard]], request: PlanRequest,
                    config: Optional[ScoringConfig] = None) -> List[RankedPlan]:
    """Feasible plans first, each block ordered by score, then size, then root simulation."""
    total_weight = sum(request.weights.values())
    ranked = [RankedPlan(dag, card, check_requirements(dag, card, request, config))
              for dag, card in scored]

    def key(rp: RankedPlan):
        norm = round(rp.score.weighted_score / total_weight, 9) if total_weight > 0 else 0.0
        root = sort_key(rp.dag.root[1]) if rp.dag.root else (-1, "")
        nodes = tuple(sorted(_key_sort(k) for k in rp.dag.nodes))
        return (not rp.feasible, -norm, len(rp.dag), root, nodes)

    ranked.sort(key=key)
    return ranked


@dataclass
class PlanReport:
    request: PlanRequest
    ranked: List[RankedPlan]
    depth_exceeded: bool = False
    plan_limit_reached: bool = False
    warnings: List[str] = field(default_factory=list)

    @property
    def feasible(self) -> List[RankedPlan]:
        return [r for r in self.ranked if r.feasible]


def plan(model: ModelBundle, request: PlanRequest,
         config: Optional[ScoringConfig] = None) -> PlanReport:
    """Enumerate, score, check and rank all plans for ``request``."""
    config = config or ScoringConfig()
    plans = enumerate_plans(model, request)
    scorer = Scorer(model, config)
    scored = [(dag, scorer.score(dag, request)) for dag in plans]
    ranked = rank_and_filter(scored, request, config)
    warnings: List[str] = []
    for _, card in scored:
        warnings.extend(card.warnings)
    present = set()
    for dag, _ in scored:
        present.update(scorer.kinds_in(dag))
    for kind in sorted(set(request.requirements) | set(request.limits), key=sort_key):
        if kind not in present:
            warnings.append(f"criterion {model.prefixes.format(kind)} does not occur in any plan")
    return PlanReport(request, ranked, plans.depth_exceeded, plans.plan_limit_reached,
                      list(dict.fromkeys(warnings)))


def sweep_values(lo: float, hi: float, step: float) -> List[float]:
    if step <= 0:
        raise ValueError("sweep step must be positive")
    out = []
    i = 0
    while True:
        v = round(lo + i * step, 12)
        if v > hi + _CMP_TOL:
            return out
        out.append(v)
        i += 1


@dataclass
class SweepRow:
    threshold: float
    feasible_count: int
    top: Optional[RankedPlan]


def whatif(model: ModelBundle, request: PlanRequest, kind: Term, values: Sequence[float],
           config: Optional[ScoringConfig] = None) -> Tuple[List[SweepRow], List[str]]:
    """Re-rank the plans of ``request`` with the requirement on ``kind`` set to each value."""
    config = config or ScoringConfig()
    plans = enumerate_plans(model, request)
    scorer = Scorer(model, config)
    rows = []
    warnings: List[str] = []
    present = set()
    for dag in plans:
        present.update(scorer.kinds_in(dag))
    if kind not in present:
        warnings.append(f"criterion {model.prefixes.format(kind)} does not occur in any plan; "
                        f"the sweep has no effect")
    for value in values:
        req = PlanRequest(request.goal, request.known, dict(request.weights),
                          {**request.requirements, kind: value}, dict(request.limits),
                          request.max_depth, request.max_plans, request.match_mode)
        ranked = rank_and_filter([(d, scorer.score(d, req)) for d in plans], req, config)
        feasible = [r for r in ranked if r.feasible]
        rows.append(SweepRow(value, len(feasible), feasible[0] if feasible else None))
    return rows, warnings
