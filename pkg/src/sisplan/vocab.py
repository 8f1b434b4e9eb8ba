"""Namespaces and class/property constants of the simulation model.

The model aligns four vocabularies (CSS capabilities, VDI 3633 simulation
terms, DIN EN 61360 property descriptions, ParX interdependencies) with the
SiS extension. Namespace IRIs are configurable: build a :class:`Vocabulary`
from a prefix map when a data set uses different ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

from .graph import IRI, OWL_NS, RDF_NS, RDFS_NS, XSD_NS

DEFAULT_NAMESPACES: Dict[str, str] = {
    "CSS": "http://www.w3id.org/hsu-aut/css#",
    "VDI3633": "http://www.w3id.org/hsu-aut/VDI3633#",
    "DINEN61360": "http://www.w3id.org/hsu-aut/DINEN61360#",
    "SiS": "http://www.w3id.org/hsu-aut/SiS#",
    "ParX": "http://www.w3id.org/hsu-aut/ParX#",
    "OM": "http://openmath.org/vocab/math#",
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "owl": OWL_NS,
    "xsd": XSD_NS,
}

_TERMS = {
    "CSS": ("Resource", "Process", "Capability", "providesCapability",
            "requiresCapability", "executes"),
    "VDI3633": ("Simulation", "Data", "hasProcessQuantity", "hasResultsData"),
    "DINEN61360": ("DataElement", "TypeDescription", "InstanceDescription",
                   "hasDataElement", "hasTypeDescription", "hasInstanceDescription",
                   "value"),
    "SiS": ("QualityCriteria", "hasQualityCriteria", "Influence", "SensitivityIndex",
            "InfluenceScore", "Interdependency", "hasInfluence", "hasInfluenceOn",
            "isInfluenceFor"),
    "ParX": ("Interdependency", "hasApplication"),
}


class Namespace:
    """Attribute access to the fixed terms of one vocabulary."""

    def __init__(self, label: str, base: str, names):
        self._label = label
        self._base = base
        for name in names:
            setattr(self, name, IRI(base + name))

    @property
    def base(self) -> str:
        return self._base

    def __getitem__(self, name: str) -> IRI:
        return IRI(self._base + name)

    def __repr__(self) -> str:
        return f"Namespace({self._label}: <{self._base}>)"


@dataclass
class Vocabulary:
    namespaces: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_NAMESPACES))

    def __post_init__(self):
        for label in _TERMS:
            if label not in self.namespaces:
                self.namespaces[label] = DEFAULT_NAMESPACES[label]
        self.CSS = Namespace("CSS", self.namespaces["CSS"], _TERMS["CSS"])
        self.VDI3633 = Namespace("VDI3633", self.namespaces["VDI3633"], _TERMS["VDI3633"])
        self.DINEN61360 = Namespace("DINEN61360", self.namespaces["DINEN61360"],
                                    _TERMS["DINEN61360"])
        self.SiS = Namespace("SiS", self.namespaces["SiS"], _TERMS["SiS"])
        self.ParX = Namespace("ParX", self.namespaces["ParX"], _TERMS["ParX"])

    @classmethod
    def from_prefixes(cls, prefixes: Optional[Mapping[str, str]] = None) -> "Vocabulary":
        """Defaults overridden by any of the model's prefix labels found in ``prefixes``."""
        ns = dict(DEFAULT_NAMESPACES)
        for label in _TERMS:
            if prefixes and label in prefixes:
                ns[label] = prefixes[label]
        return cls(ns)

    def all_terms(self) -> Dict[str, IRI]:
        out = {}
        for label, names in _TERMS.items():
            space = getattr(self, label)
            for name in names:
                out[f"{label}:{name}"] = getattr(space, name)
        return out


DEFAULT_VOCAB = Vocabulary()
