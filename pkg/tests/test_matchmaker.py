import random

import pytest

from sisplan.graph import IRI, RDF_TYPE
from sisplan.matchmaker import (STRICT, TYPE_RELAXED, Match, NotASimulation, influences_on,
                                inputs_of, quality_criteria_of, simulations_for_output)
from sisplan.schema import extract_records
from sisplan.turtle import read_turtle

from support import CSS, DIN, FIXTURE, VDI, gen, matchmaker_cross_check, random_model_graph, rtm


@pytest.fixture(scope="module")
def model():
    return extract_records(read_turtle(FIXTURE))


def test_local_fill_time(model):
    assert simulations_for_output(model, rtm("LocalFillTime")) == [
        Match(rtm("SimulatingThermosetInfiltration1"), rtm("SimulatingInfiltration1"),
              rtm("InfiltrationSimulationDL")),
        Match(rtm("SimulatingThermosetInfiltration1"), rtm("SimulatingInfiltration1"),
              rtm("InfiltrationSimulationTPDL")),
    ]


def test_textile_permeability(model):
    assert simulations_for_output(model, rtm("TextilePermeability")) == [
        Match(rtm("DryFiberForming"), rtm("SimulatingDraping1"), rtm("KinematicDraping"))]


def test_unproduced_and_unknown_parameters(model):
    assert simulations_for_output(model, rtm("Geometry")) == []
    assert simulations_for_output(model, IRI("http://nowhere.org/x")) == []


def test_quality_criteria(model):
    dl = quality_criteria_of(model, rtm("InfiltrationSimulationDL"))
    tpdl = quality_criteria_of(model, rtm("InfiltrationSimulationTPDL"))
    assert [(c.kind, c.value) for c in dl] == [(rtm("ResultAccuracy"), 0.7)]
    assert [(c.kind, c.value) for c in tpdl] == [(rtm("ResultAccuracy"), 0.8)]


def test_simulation_without_criteria():
    g = read_turtle(FIXTURE)
    g.add(gen("Bare"), RDF_TYPE, VDI.Simulation)
    assert quality_criteria_of(extract_records(g), gen("Bare")) == []


def test_not_a_simulation(model):
    for op in (quality_criteria_of, inputs_of, influences_on):
        with pytest.raises(NotASimulation):
            op(model, rtm("Geometry"))


def test_inputs(model):
    assert {r.parameter for r in inputs_of(model, rtm("InfiltrationSimulationDL"))} == {
        rtm("Geometry"), rtm("TextilePermeability"), rtm("ResinViscosity")}
    assert [r.parameter for r in inputs_of(model, rtm("KinematicDraping"))] == [rtm("ShellFEModel")]


def test_inputs_of_unrequired_capability():
    g = read_turtle(FIXTURE)
    g.add(gen("Lonely"), RDF_TYPE, VDI.Simulation)
    g.add(gen("Lonely"), CSS.providesCapability, gen("Unused"))
    g.add(gen("Unused"), RDF_TYPE, CSS.Capability)
    assert inputs_of(extract_records(g), gen("Lonely")) == []


def test_influences(model):
    infs = influences_on(model, rtm("InfiltrationSimulationDL"))
    assert {i.source: i.value for i in infs} == {rtm("TextilePermeability"): 0.4,
                                                 rtm("Geometry"): 0.4, rtm("ResinViscosity"): 0.2}
    assert sum(i.value for i in infs) == pytest.approx(1.0, abs=1e-12)
    assert influences_on(model, rtm("KinematicDraping")) == []


def test_type_relaxed_matching():
    g = read_turtle(FIXTURE)
    # a second permeability node sharing the type description of the produced one
    for node, elem in [(rtm("TextilePermeability"), gen("PermElem")),
                       (gen("MeasuredPermeability"), gen("PermElem2"))]:
        g.add(node, DIN.hasDataElement, elem)
        g.add(elem, DIN.hasTypeDescription, gen("Permeability"))
    g.add(gen("MeasuredPermeability"), RDF_TYPE, VDI.Data)
    m = extract_records(g)
    assert simulations_for_output(m, gen("MeasuredPermeability"), STRICT) == []
    relaxed = simulations_for_output(m, gen("MeasuredPermeability"), TYPE_RELAXED)
    assert [x.simulation for x in relaxed] == [rtm("KinematicDraping")]


def test_untyped_capability_is_not_matched():
    g = read_turtle(FIXTURE)
    g.remove(next(g.triples(rtm("SimulatingDraping1"), RDF_TYPE, CSS.Capability)))
    assert simulations_for_output(extract_records(g), rtm("TextilePermeability")) == []


# -- cross-check against the query engine -----------------------------------

def test_matches_query_engine_on_random_models():
    rng = random.Random(17)
    for _ in range(100):
        matchmaker_cross_check(random_model_graph(rng))


def test_matches_query_engine_on_fixture():
    matchmaker_cross_check(read_turtle(FIXTURE))


def test_nonempty_iff_some_process_produces():
    rng = random.Random(23)
    for _ in range(100):
        g = random_model_graph(rng, untyped_rate=0.0)
        m = extract_records(g)
        for p in m.parameters:
            producing = [pr for pr in m.processes.values() if p in pr.outputs
                         and any(m.capabilities[c].provided_by for c in pr.requires)]
            assert bool(simulations_for_output(m, p)) == bool(producing)
