"""Knowledge-graph model of simulation capabilities, with a query engine and a
planner that derives ordered simulation sequences for a wanted parameter."""
from pathlib import Path

from .graph import BNode, Graph, IRI, Literal, PrefixMap, Triple, TriplePattern, Variable
from .lexer import ParseError
from .matchmaker import (Match, NotASimulation, influences_on, inputs_of, quality_criteria_of,
                         simulations_for_output)
from .planner import (CycleDetected, GoalUnreachable, PlanDag, PlanNode, PlanRequest, ScoreCard,
                      ScoringConfig, enumerate_plans, plan, propagate_requirements,
                      rank_and_filter, score_plan, topological_order)
from .schema import ModelBundle, Violation, extract_records, validate
from .sparql import UnsupportedFeature, execute, parse_query, run_query
from .turtle import parse_turtle, read_turtle, serialize_turtle
from .vocab import DEFAULT_VOCAB, Vocabulary

__version__ = "0.1.0"

__all__ = [
    "BNode", "Graph", "IRI", "Literal", "PrefixMap", "Triple", "TriplePattern", "Variable",
    "ParseError", "Match", "NotASimulation", "influences_on", "inputs_of", "quality_criteria_of",
    "simulations_for_output", "CycleDetected", "GoalUnreachable", "PlanDag", "PlanNode",
    "PlanRequest", "ScoreCard", "ScoringConfig", "enumerate_plans", "plan",
    "propagate_requirements", "rank_and_filter", "score_plan", "topological_order",
    "ModelBundle", "Violation", "extract_records", "validate", "UnsupportedFeature", "execute",
    "parse_query", "run_query", "parse_turtle", "read_turtle", "serialize_turtle",
    "DEFAULT_VOCAB", "Vocabulary", "DATA_DIR", "SCHEMA_DIR", "data_path", "load_model",
]

DATA_DIR = Path(__file__).resolve().parent / "data"
SCHEMA_DIR = Path(__file__).resolve().parent / "schemas"


def data_path(name: str) -> Path:
    """Path of a bundled example file, e.g. ``data_path("rtm_infiltration.ttl")``."""
    return DATA_DIR / name


def load_model(*names: str) -> ModelBundle:
    """Merge bundled Turtle files and extract the typed model."""
    graph = Graph()
    for name in names:
        g = read_turtle(data_path(name))
        graph.prefixes.update(g.prefixes)
        graph.update(g)
    return extract_records(graph, Vocabulary.from_prefixes(graph.prefixes))
