"""SELECT/WHERE basic graph pattern queries.

Only conjunctive triple patterns are supported. Anything else (FILTER,
OPTIONAL, UNION, property paths, modifiers, ...) raises
:class:`UnsupportedFeature` naming the construct.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .graph import (
    Graph, IRI, Literal, PrefixMap, RDF_TYPE, Term, TriplePattern, Variable,
    XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, _SCHEME, sort_key,
)
from .lexer import Lexer, ParseError, Token

__all__ = [
    "Curie", "ParseError", "ResultTable", "SelectQuery", "UnsupportedFeature",
    "execute", "parse_query", "run_query",
]

_UNSUPPORTED_KEYWORDS = {
    "FILTER", "OPTIONAL", "UNION", "MINUS", "BIND", "VALUES", "GRAPH", "SERVICE",
    "ORDER", "LIMIT", "OFFSET", "GROUP", "HAVING", "DISTINCT", "REDUCED", "FROM",
    "CONSTRUCT", "ASK", "DESCRIBE", "INSERT", "DELETE", "LOAD", "CLEAR", "DROP",
    "CREATE", "EXISTS", "NOT", "AS",
}
_NUMERIC = {"INTEGER": XSD_INTEGER, "DECIMAL": XSD_DECIMAL, "DOUBLE": XSD_DOUBLE}


class UnsupportedFeature(ParseError):
    def __init__(self, feature: str, line: int, column: int, source: Optional[str] = None):
        self.feature = feature
        super().__init__(f"unsupported: {feature}", line, column, "syntactic", source)


@dataclass(frozen=True)
class Curie:
    """Prefixed name whose prefix is resolved at execution time."""

    prefix: str
    local: str
    line: int = 0
    column: int = 0

    kind = "curie"

    def n3(self) -> str:
        return f"{self.prefix}:{self.local}"


@dataclass
class SelectQuery:
    projected: List[str]
    patterns: List[TriplePattern]
    prefixes: Dict[str, str] = field(default_factory=dict)

    def variables(self) -> List[str]:
        seen: List[str] = []
        for pat in self.patterns:
            for name in pat.variables():
                if name not in seen:
                    seen.append(name)
        return seen

    def resolve(self, prefixes: Optional[Mapping[str, str]] = None) -> "SelectQuery":
        """Expand deferred prefixed names; query PREFIX declarations win over ``prefixes``."""
        table = PrefixMap(prefixes or {})
        table.update(self.prefixes)

        def res(t):
            if isinstance(t, Curie):
                if t.prefix not in table:
                    raise ParseError(f"undeclared prefix {t.prefix + ':'!r}", t.line, t.column,
                                     "unknown-prefix")
                return IRI(table[t.prefix] + t.local)
            return t

        pats = [TriplePattern(res(p.subject), res(p.predicate), res(p.object)) for p in self.patterns]
        return SelectQuery(list(self.projected), pats, dict(self.prefixes))

    @property
    def resolved(self) -> bool:
        return not any(isinstance(t, Curie) for p in self.patterns for t in p)


class _QueryParser:
    def __init__(self, text: str, source: Optional[str]):
        self.source = source
        self.lexer = Lexer(text, allow_variables=True, source=source)
        self.tok = self.lexer.next()
        self.prefixes: Dict[str, str] = {}
        self.base: Optional[str] = None

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column, "syntactic", self.source)

    def advance(self) -> Token:
        prev = self.tok
        self.tok = self.lexer.next()
        return prev

    def _keyword(self, tok: Token) -> Optional[str]:
        return tok.text.upper() if tok.type == "NAME" else None

    def _check_unsupported(self, tok: Token) -> None:
        kw = self._keyword(tok)
        if kw in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(kw, tok.line, tok.column, self.source)
        if tok.type == "PUNCT" and tok.text in "|/^!*+":
            raise UnsupportedFeature(f"property path operator {tok.text!r}", tok.line, tok.column,
                                     self.source)
        if tok.type == "PUNCT" and tok.text in "([":
            what = "blank node property list" if tok.text == "[" else "collection"
            raise UnsupportedFeature(what, tok.line, tok.column, self.source)

    def parse(self) -> SelectQuery:
        while True:
            kw = self._keyword(self.tok)
            if kw == "PREFIX":
                self.advance()
                label_tok = self.tok
                if label_tok.type != "PNAME" or not label_tok.text.endswith(":") \
                        or label_tok.text.count(":") != 1:
                    raise self.error("expected prefix label after PREFIX")
                self.advance()
                iri_tok = self.tok
                if iri_tok.type != "IRIREF":
                    raise self.error("expected namespace IRI")
                self.advance()
                self.prefixes[label_tok.text[:-1]] = self._absolute(iri_tok)
            elif kw == "BASE":
                self.advance()
                if self.tok.type != "IRIREF" or not _SCHEME.match(self.tok.text):
                    raise self.error("expected absolute base IRI")
                self.base = self.advance().text
            else:
                break
        self._check_unsupported(self.tok)
        if self._keyword(self.tok) != "SELECT":
            raise self.error("expected SELECT")
        self.advance()
        kw = self._keyword(self.tok)
        if kw in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(kw, self.tok.line, self.tok.column, self.source)
        projected: List[str] = []
        star = False
        if self.tok.type == "PUNCT" and self.tok.text == "*":
            self.advance()
            star = True
        else:
            while self.tok.type == "VAR":
                name = self.advance().text
                if name not in projected:
                    projected.append(name)
            if not projected:
                self._check_unsupported(self.tok)
                if self.tok.type == "PUNCT" and self.tok.text == "(":
                    raise UnsupportedFeature("projection expression", self.tok.line,
                                             self.tok.column, self.source)
                raise self.error("expected projected variables or '*'")
        self._check_unsupported(self.tok)
        if self._keyword(self.tok) == "WHERE":
            self.advance()
        if not (self.tok.type == "PUNCT" and self.tok.text == "{"):
            raise self.error("expected '{'")
        self.advance()
        patterns = self.group()
        self._check_unsupported(self.tok)
        if self.tok.type != "EOF":
            raise self.error(f"unexpected {self.tok.raw!r} after query body")
        query = SelectQuery(projected, patterns, self.prefixes)
        if star:
            query.projected = [v for v in query.variables() if not v.startswith("_:")]
        else:
            present = set(query.variables())
            for name in projected:
                if name not in present:
                    raise ParseError(f"projected variable ?{name} does not occur in any pattern",
                                     1, 1, "syntactic", self.source)
        return query

    def group(self) -> List[TriplePattern]:
        patterns: List[TriplePattern] = []
        while True:
            self._check_unsupported(self.tok)
            if self.tok.type == "PUNCT" and self.tok.text == "{":
                raise UnsupportedFeature("nested group pattern", self.tok.line, self.tok.column,
                                         self.source)
            if self.tok.type == "PUNCT" and self.tok.text == "}":
                self.advance()
                return patterns
            if self.tok.type == "EOF":
                raise self.error("unterminated group pattern, expected '}'")
            subject = self.term(position="subject")
            self.property_list(subject, patterns)
            if self.tok.type == "PUNCT" and self.tok.text == ".":
                self.advance()
            elif not (self.tok.type == "PUNCT" and self.tok.text == "}"):
                self._check_unsupported(self.tok)
                raise self.error(f"expected '.' or '}}', found {self.tok.raw!r}")

    def property_list(self, subject, patterns: List[TriplePattern]) -> None:
        while True:
            self._check_unsupported(self.tok)
            if self.tok.type == "NAME" and self.tok.text == "a":
                self.advance()
                predicate = RDF_TYPE
            else:
                predicate = self.term(position="predicate")
            while True:
                obj = self.term(position="object")
                patterns.append(TriplePattern(subject, predicate, obj))
                if self.tok.type == "PUNCT" and self.tok.text == ",":
                    self.advance()
                    continue
                break
            if self.tok.type == "PUNCT" and self.tok.text == ";":
                while self.tok.type == "PUNCT" and self.tok.text == ";":
                    self.advance()
                if self.tok.type == "PUNCT" and self.tok.text in ".}":
                    return
                continue
            return

    def _absolute(self, tok: Token) -> str:
        if _SCHEME.match(tok.text):
            return tok.text
        if self.base is None:
            raise self.error(f"relative IRI <{tok.text}> without BASE", tok)
        from urllib.parse import urljoin
        return urljoin(self.base, tok.text)

    def term(self, position: str):
        self._check_unsupported(self.tok)
        tok = self.tok
        if tok.type == "VAR":
            self.advance()
            return Variable(tok.text)
        if tok.type == "IRIREF":
            self.advance()
            return IRI(self._absolute(tok))
        if tok.type == "PNAME":
            self.advance()
            prefix, local = tok.text.split(":", 1)
            if prefix in self.prefixes:
                return IRI(self.prefixes[prefix] + local)
            return Curie(prefix, local, tok.line, tok.column)
        if position == "predicate":
            raise self.error(f"expected predicate, found {tok.raw or 'end of input'!r}")
        if tok.type == "BNODE":
            self.advance()
            # blank nodes in patterns behave as non-projectable variables
            return Variable("_:" + tok.text)
        if position == "object":
            if tok.type in _NUMERIC:
                self.advance()
                return Literal(tok.text, _NUMERIC[tok.type])
            if tok.type == "NAME" and tok.text in ("true", "false"):
                self.advance()
                return Literal(tok.text, XSD_BOOLEAN)
            if tok.type == "STRING":
                self.advance()
                if self.tok.type == "LANGTAG":
                    return Literal(tok.text, language=self.advance().text)
                if self.tok.type == "PUNCT" and self.tok.text == "^^":
                    self.advance()
                    dt = self.term(position="datatype")
                    if isinstance(dt, Curie):
                        raise ParseError(f"undeclared prefix {dt.prefix + ':'!r}", dt.line,
                                         dt.column, "unknown-prefix", self.source)
                    return Literal(tok.text, dt.value)
                return Literal(tok.text)
        raise self.error(f"expected {position}, found {tok.raw or 'end of input'!r}")


def parse_query(text: str, prefixes: Optional[Mapping[str, str]] = None,
                source: Optional[str] = None) -> SelectQuery:
    """Parse a SELECT query.

    Prefixed names not declared in the query stay deferred (:class:`Curie`)
    until :func:`execute` resolves them with the graph's prefix map, unless
    ``prefixes`` is given here.
    """
    query = _QueryParser(text, source).parse()
    if prefixes is not None:
        query = query.resolve(prefixes)
    return query


@dataclass
class ResultTable:
    header: List[str]
    rows: List[Dict[str, Term]]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[Dict[str, Term]]:
        return iter(self.rows)

    def tuples(self) -> List[Tuple[Term, ...]]:
        return [tuple(row[h] for h in self.header) for row in self.rows]

    def column(self, name: str) -> List[Term]:
        return [row[name] for row in self.rows]


def _order_patterns(graph: Graph, patterns: Sequence[TriplePattern]) -> List[TriplePattern]:
    """Greedy join order: fewest matching triples first, preferring patterns
    connected to already-bound variables."""
    def estimate(pat: TriplePattern) -> int:
        consts = [None if isinstance(t, Variable) else t for t in pat]
        return graph.count(*consts)

    sizes = {i: estimate(p) for i, p in enumerate(patterns)}
    remaining = list(range(len(patterns)))
    bound: set = set()
    order: List[TriplePattern] = []
    while remaining:
        def key(i):
            connected = bool(bound & set(patterns[i].variables())) or not bound
            return (not connected, sizes[i], i)
        best = min(remaining, key=key)
        remaining.remove(best)
        order.append(patterns[best])
        bound.update(patterns[best].variables())
    return order


def _solutions(graph: Graph, patterns: Sequence[TriplePattern],
               binding: Dict[str, Term]) -> Iterator[Dict[str, Term]]:
    if not patterns:
        yield binding
        return
    first = patterns[0].substitute(binding)
    for partial in graph.match(first):
        merged = dict(binding)
        merged.update(partial)
        yield from _solutions(graph, patterns[1:], merged)


def execute(graph: Graph, query: SelectQuery, reorder: bool = True) -> ResultTable:
    """Evaluate ``query`` with bag semantics; rows sorted by their projected terms."""
    if not query.resolved:
        query = query.resolve(graph.prefixes)
    patterns = _order_patterns(graph, query.patterns) if reorder else list(query.patterns)
    header = list(query.projected)
    rows = []
    for solution in _solutions(graph, patterns, {}):
        rows.append({name: solution[name] for name in header})
    rows.sort(key=lambda r: tuple(sort_key(r[h]) for h in header))
    return ResultTable(header, rows)


def run_query(graph: Graph, text: str, source: Optional[str] = None) -> ResultTable:
    return execute(graph, parse_query(text, source=source))
