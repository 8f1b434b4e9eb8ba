"""Capability matchmaking over an extracted model.

Each function answers one of the basic questions a planner asks: which
simulations can produce a parameter, what a simulation needs as input, how
good it is, and how strongly its inputs matter.
"""
from __future__ import annotations

from typing import List, NamedTuple, Optional

from .graph import Term, sort_key
from .schema import InfluenceRecord, ModelBundle, QualityCriterion

STRICT = "strict"
TYPE_RELAXED = "typeRelaxed"


class NotASimulation(LookupError):
    def __init__(self, node: Term):
        self.node = node
        super().__init__(f"{node.n3()} is not a simulation")


class Match(NamedTuple):
    process: Term
    capability: Term
    simulation: Term


class InputRow(NamedTuple):
    capability: Term
    process: Term
    parameter: Term


def _require_simulation(model: ModelBundle, simulation: Term) -> None:
    if not model.is_a(simulation, model.vocab.VDI3633.Simulation):
        raise NotASimulation(simulation)


def _same_type(model: ModelBundle, a: Term, b: Term) -> bool:
    ra, rb = model.parameters.get(a), model.parameters.get(b)
    if ra is None or rb is None or ra.type_description is None:
        return False
    return ra.type_description == rb.type_description


def producing_processes(model: ModelBundle, parameter: Term, mode: str = STRICT) -> List[Term]:
    out = []
    for proc in model.processes.values():
        if parameter in proc.outputs:
            out.append(proc.id)
        elif mode == TYPE_RELAXED and any(_same_type(model, parameter, o) for o in proc.outputs):
            out.append(proc.id)
    return sorted(out, key=sort_key)


def simulations_for_output(model: ModelBundle, parameter: Term, mode: str = STRICT) -> List[Match]:
    """(process, capability, simulation) triples able to produce ``parameter``.

    In ``typeRelaxed`` mode a process output also counts when it shares the
    parameter's DIN EN 61360 type description; the shared node is still
    preferred because it is always included.
    """
    CSS, VDI = model.vocab.CSS, model.vocab.VDI3633
    matches = set()
    for proc in producing_processes(model, parameter, mode):
        for cap in model.processes[proc].requires:
            if not model.is_a(cap, CSS.Capability):
                continue
            for sim in model.graph.subjects(CSS.providesCapability, cap):
                if model.is_a(sim, VDI.Simulation):
                    matches.add(Match(proc, cap, sim))
    return sorted(matches, key=lambda m: (sort_key(m.process), sort_key(m.simulation),
                                          sort_key(m.capability)))


def quality_criteria_of(model: ModelBundle, simulation: Term) -> List[QualityCriterion]:
    _require_simulation(model, simulation)
    rec = model.simulations.get(simulation)
    if rec is None:
        return []
    return sorted(rec.criteria, key=lambda c: sort_key(c.id))


def criterion_value(model: ModelBundle, simulation: Term, kind: Term) -> Optional[float]:
    """Value of the simulation's criterion of type ``kind`` (first by id), or None."""
    rec = model.simulations.get(simulation)
    if rec is None:
        return None
    for crit in sorted(rec.criteria, key=lambda c: sort_key(c.id)):
        if crit.kind == kind and crit.value is not None:
            return crit.value
    return None


def processes_served_by(model: ModelBundle, simulation: Term) -> List[tuple]:
    """(capability, process) pairs where the simulation provides what the process requires."""
    rec = model.simulations.get(simulation)
    provides = rec.provides if rec else frozenset()
    pairs = []
    for cap in provides:
        for proc in model.graph.subjects(model.vocab.CSS.requiresCapability, cap):
            pairs.append((cap, proc))
    return sorted(set(pairs), key=lambda cp: (sort_key(cp[0]), sort_key(cp[1])))


def inputs_of(model: ModelBundle, simulation: Term) -> List[InputRow]:
    _require_simulation(model, simulation)
    VDI = model.vocab.VDI3633
    rows = set()
    for cap, proc in processes_served_by(model, simulation):
        for par in model.graph.objects(proc, VDI.hasProcessQuantity):
            rows.add(InputRow(cap, proc, par))
    return sorted(rows, key=lambda r: tuple(sort_key(t) for t in r))


def influences_on(model: ModelBundle, simulation: Term) -> List[InfluenceRecord]:
    """Influence records targeting a process the simulation can execute.

    Mirrors the parameter -> influence direction: only influences with a
    source parameter are returned.
    """
    _require_simulation(model, simulation)
    procs = {proc for _, proc in processes_served_by(model, simulation)}
    out = [inf for inf in model.influences.values()
           if inf.target_process in procs and inf.source is not None]
    return sorted(out, key=lambda i: (sort_key(i.target_process), sort_key(i.source),
                                      sort_key(i.id)))
