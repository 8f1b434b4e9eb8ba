"""RDF-style terms, an indexed in-memory triple store and prefix handling.

Everything above this module (Turtle, queries, schema extraction, planning)
reads the model through :class:`Graph`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

XSD_STRING = XSD_NS + "string"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_DOUBLE = XSD_NS + "double"
XSD_FLOAT = XSD_NS + "float"

_INTEGER_TYPES = {
    XSD_INTEGER,
    XSD_NS + "int",
    XSD_NS + "long",
    XSD_NS + "short",
    XSD_NS + "byte",
    XSD_NS + "nonNegativeInteger",
    XSD_NS + "positiveInteger",
    XSD_NS + "nonPositiveInteger",
    XSD_NS + "negativeInteger",
    XSD_NS + "unsignedInt",
    XSD_NS + "unsignedLong",
}
NUMERIC_TYPES = frozenset(_INTEGER_TYPES | {XSD_DECIMAL, XSD_DOUBLE, XSD_FLOAT})

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_INTEGER_LEX = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL_LEX = re.compile(r"^[+-]?[0-9]*\.[0-9]+$|^[+-]?[0-9]+\.?$")
_DOUBLE_LEX = re.compile(
    r"^[+-]?([0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)([eE][+-]?[0-9]+)?$|^[+-]?INF$|^NaN$"
)


class MalformedTerm(ValueError):
    """A term or triple violates the structural invariants of the store."""


class UnknownPrefix(KeyError):
    def __init__(self, prefix: str):
        super().__init__(prefix)
        self.prefix = prefix

    def __str__(self) -> str:
        return f"unknown prefix {self.prefix!r}"


def _escape_literal(text: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append("\\u%04X" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True, order=False)
class IRI:
    value: str

    def __post_init__(self):
        if not _SCHEME.match(self.value):
            raise MalformedTerm(f"IRI is not absolute: {self.value!r}")

    kind = "iri"

    def n3(self) -> str:
        return f"<{self.value}>"

    def __str__(self) -> str:
        return self.value

    @property
    def local_name(self) -> str:
        """Fragment after the last '#', '/' or ':'."""
        v = self.value
        cut = max(v.rfind("#"), v.rfind("/"), v.rfind(":"))
        return v[cut + 1:]


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: Optional[str] = None
    language: Optional[str] = None

    kind = "literal"

    def __post_init__(self):
        if self.language is not None and self.datatype is not None:
            raise MalformedTerm("a literal cannot have both a language tag and a datatype")
        if self.datatype is not None and not _SCHEME.match(self.datatype):
            raise MalformedTerm(f"datatype IRI is not absolute: {self.datatype!r}")

    def n3(self) -> str:
        body = '"' + _escape_literal(self.lexical) + '"'
        if self.language is not None:
            return f"{body}@{self.language}"
        if self.datatype is not None:
            return f"{body}^^<{self.datatype}>"
        return body

    def __str__(self) -> str:
        return self.lexical

    @property
    def is_numeric(self) -> bool:
        return self.datatype in NUMERIC_TYPES

    @property
    def value(self):
        """Decoded value for numeric and boolean datatypes, else the lexical form.

        Integers and decimals decode to :class:`~decimal.Decimal`, doubles and
        floats to ``float``. Raises ``ValueError`` on an ill-typed lexical form.
        """
        dt = self.datatype
        lex = self.lexical.strip()
        if dt in _INTEGER_TYPES:
            if not _INTEGER_LEX.match(lex):
                raise ValueError(f"not a valid integer: {self.lexical!r}")
            return Decimal(lex)
        if dt == XSD_DECIMAL:
            if not _DECIMAL_LEX.match(lex):
                raise ValueError(f"not a valid decimal: {self.lexical!r}")
            return Decimal(lex)
        if dt in (XSD_DOUBLE, XSD_FLOAT):
            if not _DOUBLE_LEX.match(lex):
                raise ValueError(f"not a valid double: {self.lexical!r}")
            return float(lex)
        if dt == XSD_BOOLEAN:
            if lex in ("true", "1"):
                return True
            if lex in ("false", "0"):
                return False
            raise ValueError(f"not a valid boolean: {self.lexical!r}")
        return self.lexical

    def well_typed(self) -> bool:
        try:
            self.value
        except (ValueError, InvalidOperation):
            return False
        return True


@dataclass(frozen=True)
class BNode:
    label: str

    kind = "blankNode"

    def n3(self) -> str:
        return f"_:{self.label}"

    def __str__(self) -> str:
        return self.n3()


@dataclass(frozen=True)
class Variable:
    name: str

    kind = "variable"

    def n3(self) -> str:
        return f"?{self.name}"

    def __str__(self) -> str:
        return self.n3()


Term = Union[IRI, Literal, BNode, Variable]

RDF_TYPE = IRI(RDF_NS + "type")
RDFS_SUBCLASSOF = IRI(RDFS_NS + "subClassOf")
OWL_EQUIVALENTCLASS = IRI(OWL_NS + "equivalentClass")


def sort_key(term: Term) -> Tuple[int, str]:
    """Canonical ordering: IRIs, blank nodes, literals, variables; then N-Triples text."""
    rank = {"iri": 0, "blankNode": 1, "literal": 2, "variable": 3}[term.kind]
    return rank, term.n3()


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (IRI, BNode)):
            raise MalformedTerm(f"subject must be an IRI or blank node, got {self.subject!r}")
        if not isinstance(self.predicate, IRI):
            raise MalformedTerm(f"predicate must be an IRI, got {self.predicate!r}")
        if not isinstance(self.object, (IRI, BNode, Literal)):
            raise MalformedTerm(f"object must be an IRI, blank node or literal, got {self.object!r}")

    def __iter__(self):
        yield self.subject
        yield self.predicate
        yield self.object

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def __iter__(self):
        yield self.subject
        yield self.predicate
        yield self.object

    def variables(self) -> Tuple[str, ...]:
        seen = []
        for t in self:
            if isinstance(t, Variable) and t.name not in seen:
                seen.append(t.name)
        return tuple(seen)

    def substitute(self, binding: Mapping[str, Term]) -> "TriplePattern":
        def sub(t):
            if isinstance(t, Variable) and t.name in binding:
                return binding[t.name]
            return t

        return TriplePattern(sub(self.subject), sub(self.predicate), sub(self.object))

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


_PN_LOCAL = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$")
_PN_PREFIX = re.compile(r"^(?:[A-Za-z](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?$")


class PrefixMap(dict):
    """Prefix label -> namespace IRI. Labels are stored without the colon."""

    def bind(self, label: str, namespace: str) -> None:
        if not _PN_PREFIX.match(label):
            raise ValueError(f"invalid prefix label {label!r}")
        self[label] = namespace

    def expand(self, curie: str) -> IRI:
        if ":" not in curie:
            raise ValueError(f"not a prefixed name: {curie!r}")
        label, local = curie.split(":", 1)
        if label not in self:
            raise UnknownPrefix(label)
        return IRI(self[label] + local)

    def compact(self, iri: Union[IRI, str]) -> str:
        """Shortest prefixed form of ``iri``, or ``<iri>`` when no prefix covers it."""
        value = iri.value if isinstance(iri, IRI) else iri
        best = None
        for label in sorted(self):
            ns = self[label]
            if ns and value.startswith(ns):
                local = value[len(ns):]
                if local == "" or _PN_LOCAL.match(local):
                    cand = f"{label}:{local}"
                    if best is None or len(ns) > len(self[best[0]]):
                        best = (label, cand)
        return best[1] if best else f"<{value}>"

    def format(self, term: Term) -> str:
        if isinstance(term, IRI):
            return self.compact(term)
        if isinstance(term, Literal):
            return term.lexical
        return term.n3()


def expand(prefixes: Mapping[str, str], curie: str) -> IRI:
    return PrefixMap(prefixes).expand(curie)


def compact(prefixes: Mapping[str, str], iri: Union[IRI, str]) -> str:
    return PrefixMap(prefixes).compact(iri)


# Index leaves are insertion-ordered dicts (value None) rather than sets so that
# iteration order is reproducible across interpreter runs.
_Index = Dict[Term, Dict[Term, Dict[Term, None]]]


class Graph:
    """Set of triples with SPO/POS/OSP indexes and a prefix map.

    Single-writer: load the graph, then share it read-only.
    """

    def __init__(self, triples: Iterable[Triple] = (), prefixes: Optional[Mapping[str, str]] = None):
        self._spo: _Index = {}
        self._pos: _Index = {}
        self._osp: _Index = {}
        self._size = 0
        self.prefixes = PrefixMap(prefixes or {})
        for t in triples:
            self.insert(t)

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[Triple]:
        for s, pos in self._spo.items():
            for p, objs in pos.items():
                for o in objs:
                    yield Triple(s, p, o)

    def __contains__(self, triple: Triple) -> bool:
        s, p, o = triple
        return o in self._spo.get(s, {}).get(p, {})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return set(self) == set(other)

    def __repr__(self) -> str:
        return f"<Graph {self._size} triples, {len(self.prefixes)} prefixes>"

    def insert(self, triple: Triple) -> "Graph":
        if not isinstance(triple, Triple):
            raise MalformedTerm(f"not a Triple: {triple!r}")
        s, p, o = triple
        objs = self._spo.setdefault(s, {}).setdefault(p, {})
        if o in objs:
            return self
        objs[o] = None
        self._pos.setdefault(p, {}).setdefault(o, {})[s] = None
        self._osp.setdefault(o, {}).setdefault(s, {})[p] = None
        self._size += 1
        return self

    def add(self, s: Term, p: Term, o: Term) -> "Graph":
        return self.insert(Triple(s, p, o))

    def remove(self, triple: Triple) -> "Graph":
        s, p, o = triple
        try:
            del self._spo[s][p][o]
        except KeyError:
            return self
        del self._pos[p][o][s]
        del self._osp[o][s][p]
        for index, a, b in ((self._spo, s, p), (self._pos, p, o), (self._osp, o, s)):
            if not index[a][b]:
                del index[a][b]
            if not index[a]:
                del index[a]
        self._size -= 1
        return self

    def copy(self) -> "Graph":
        return Graph(self, self.prefixes)

    def update(self, other: Iterable[Triple]) -> "Graph":
        for t in other:
            self.insert(t)
        return self

    def triples(self, s: Optional[Term] = None, p: Optional[Term] = None,
                o: Optional[Term] = None) -> Iterator[Triple]:
        """Triples matching the given constants; ``None`` is a wildcard."""
        if s is not None:
            pos = self._spo.get(s, {})
            if p is not None:
                objs = pos.get(p, {})
                if o is not None:
                    if o in objs:
                        yield Triple(s, p, o)
                    return
                for oo in objs:
                    yield Triple(s, p, oo)
                return
            if o is not None:
                for pp in self._osp.get(o, {}).get(s, {}):
                    yield Triple(s, pp, o)
                return
            for pp, objs in pos.items():
                for oo in objs:
                    yield Triple(s, pp, oo)
            return
        if p is not None:
            os_ = self._pos.get(p, {})
            if o is not None:
                for ss in os_.get(o, {}):
                    yield Triple(ss, p, o)
                return
            for oo, subs in os_.items():
                for ss in subs:
                    yield Triple(ss, p, oo)
            return
        if o is not None:
            for ss, preds in self._osp.get(o, {}).items():
                for pp in preds:
                    yield Triple(ss, pp, o)
            return
        yield from self

    def count(self, s=None, p=None, o=None) -> int:
        if s is None and p is None and o is None:
            return self._size
        if s is not None and p is not None and o is None:
            return len(self._spo.get(s, {}).get(p, {}))
        if p is not None and o is not None and s is None:
            return len(self._pos.get(p, {}).get(o, {}))
        if o is not None and s is not None and p is None:
            return len(self._osp.get(o, {}).get(s, {}))
        return sum(1 for _ in self.triples(s, p, o))

    def objects(self, s: Term, p: Term) -> Iterator[Term]:
        yield from self._spo.get(s, {}).get(p, {})

    def subjects(self, p: Term, o: Term) -> Iterator[Term]:
        yield from self._pos.get(p, {}).get(o, {})

    def value(self, s: Term, p: Term) -> Optional[Term]:
        """One object of (s, p, ?), the smallest in canonical order, or None."""
        objs = list(self.objects(s, p))
        return min(objs, key=sort_key) if objs else None

    def match(self, pattern: TriplePattern) -> Iterator[Dict[str, Term]]:
        """Yield one binding per stored triple that unifies with ``pattern``.

        A repeated variable must bind the same term in every position.
        """
        consts = [None if isinstance(t, Variable) else t for t in pattern]
        names = [t.name if isinstance(t, Variable) else None for t in pattern]
        for triple in self.triples(*consts):
            binding: Dict[str, Term] = {}
            ok = True
            for name, term in zip(names, triple):
                if name is None:
                    continue
                bound = binding.get(name)
                if bound is None:
                    binding[name] = term
                elif bound != term:
                    ok = False
                    break
            if ok:
                yield binding


def insert(graph: Graph, triple: Triple) -> Graph:
    return graph.insert(triple)


def match(graph: Graph, pattern: TriplePattern) -> Iterator[Dict[str, Term]]:
    return graph.match(pattern)
