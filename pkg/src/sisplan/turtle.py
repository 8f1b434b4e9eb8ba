"""Reader and writer for the Turtle subset used by simulation model files.

Supported: ``@prefix``/``PREFIX``, one optional ``@base``/``BASE``, absolute
and prefixed IRIs, ``a``, blank node labels, string literals (all four quote
forms, escapes, language tags, ``^^`` datatypes), integer/decimal/double and
boolean shorthand, predicate lists (``;``) and object lists (``,``).

Collections ``( )`` and blank-node property lists ``[ ]`` are rejected with a
syntactic error instead of being silently dropped.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Dict, List, Optional, Union
from urllib.parse import urljoin

from .graph import (
    BNode, Graph, IRI, Literal, MalformedTerm, PrefixMap, RDF_TYPE, Term, Triple,
    XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, _SCHEME, sort_key,
)
from .lexer import Lexer, ParseError, Token

__all__ = ["ParseError", "parse_turtle", "read_turtle", "serialize_turtle"]

_NUMERIC_TOKENS = {"INTEGER": XSD_INTEGER, "DECIMAL": XSD_DECIMAL, "DOUBLE": XSD_DOUBLE}


class _TurtleParser:
    def __init__(self, text: str, source: Optional[str] = None):
        self.lexer = Lexer(text, allow_variables=False, source=source)
        self.source = source
        self.tok = self.lexer.next()
        self.graph = Graph()
        self.base: Optional[str] = None

    def error(self, message: str, tok: Optional[Token] = None, kind: str = "syntactic"):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column, kind, self.source)

    def advance(self) -> Token:
        prev = self.tok
        self.tok = self.lexer.next()
        return prev

    def expect_punct(self, ch: str) -> Token:
        if self.tok.type != "PUNCT" or self.tok.text != ch:
            raise self.error(f"expected {ch!r}, found {self._describe(self.tok)}")
        return self.advance()

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.type == "EOF" else repr(tok.raw)

    def parse(self) -> Graph:
        while self.tok.type != "EOF":
            self.statement()
        return self.graph

    def statement(self) -> None:
        tok = self.tok
        if tok.type == "DIRECTIVE":
            self.advance()
            if tok.text == "prefix":
                self.prefix_decl()
            else:
                self.base_decl(tok)
            self.expect_punct(".")
            return
        if tok.type == "NAME" and tok.text.upper() in ("PREFIX", "BASE"):
            self.advance()
            if tok.text.upper() == "PREFIX":
                self.prefix_decl()
            else:
                self.base_decl(tok)
            return
        subject = self.subject()
        self.predicate_object_list(subject)
        self.expect_punct(".")

    def prefix_decl(self) -> None:
        tok = self.tok
        if tok.type != "PNAME" or not tok.text.endswith(":") or tok.text.count(":") != 1:
            raise self.error(f"expected a prefix label such as 'ex:', found {self._describe(tok)}")
        self.advance()
        iri_tok = self.tok
        if iri_tok.type != "IRIREF":
            raise self.error(f"expected namespace IRI, found {self._describe(iri_tok)}")
        self.advance()
        self.graph.prefixes[tok.text[:-1]] = self.resolve(iri_tok)

    def base_decl(self, directive: Token) -> None:
        if self.base is not None:
            raise self.error("only a single base declaration is supported", directive)
        iri_tok = self.tok
        if iri_tok.type != "IRIREF":
            raise self.error(f"expected base IRI, found {self._describe(iri_tok)}")
        self.advance()
        if not _SCHEME.match(iri_tok.text):
            raise self.error("base IRI must be absolute", iri_tok)
        self.base = iri_tok.text

    def resolve(self, tok: Token) -> str:
        value = tok.text
        if _SCHEME.match(value):
            return value
        if self.base is None:
            raise self.error(f"relative IRI <{value}> without a base declaration", tok)
        return urljoin(self.base, value)

    def iri(self, tok: Token) -> IRI:
        if tok.type == "IRIREF":
            return IRI(self.resolve(tok))
        label, local = tok.text.split(":", 1)
        if label not in self.graph.prefixes:
            raise self.error(f"undeclared prefix {label + ':'!r}", tok, kind="unknown-prefix")
        try:
            return IRI(self.graph.prefixes[label] + local)
        except MalformedTerm as exc:
            raise self.error(str(exc), tok) from None

    def _unsupported(self, tok: Token):
        construct = "collection '( )'" if tok.text == "(" else "blank node property list '[ ]'"
        return self.error(f"unsupported construct: {construct}", tok)

    def subject(self) -> Term:
        tok = self.tok
        if tok.type in ("IRIREF", "PNAME"):
            self.advance()
            return self.iri(tok)
        if tok.type == "BNODE":
            self.advance()
            return BNode(tok.text)
        if tok.type == "PUNCT" and tok.text in "([":
            raise self._unsupported(tok)
        raise self.error(f"expected subject, found {self._describe(tok)}")

    def verb(self) -> IRI:
        tok = self.tok
        if tok.type == "NAME" and tok.text == "a":
            self.advance()
            return RDF_TYPE
        if tok.type in ("IRIREF", "PNAME"):
            self.advance()
            return self.iri(tok)
        raise self.error(f"expected predicate, found {self._describe(tok)}")

    def predicate_object_list(self, subject: Term) -> None:
        while True:
            predicate = self.verb()
            self.object_list(subject, predicate)
            if not (self.tok.type == "PUNCT" and self.tok.text == ";"):
                return
            while self.tok.type == "PUNCT" and self.tok.text == ";":
                self.advance()
            if self.tok.type == "PUNCT" and self.tok.text in ".]":
                return

    def object_list(self, subject: Term, predicate: IRI) -> None:
        while True:
            obj = self.object()
            self.graph.insert(Triple(subject, predicate, obj))
            if self.tok.type == "PUNCT" and self.tok.text == ",":
                self.advance()
                continue
            return

    def object(self) -> Term:
        tok = self.tok
        if tok.type in ("IRIREF", "PNAME"):
            self.advance()
            return self.iri(tok)
        if tok.type == "BNODE":
            self.advance()
            return BNode(tok.text)
        if tok.type in _NUMERIC_TOKENS:
            self.advance()
            return Literal(tok.text, _NUMERIC_TOKENS[tok.type])
        if tok.type == "NAME" and tok.text in ("true", "false"):
            self.advance()
            return Literal(tok.text, XSD_BOOLEAN)
        if tok.type == "STRING":
            self.advance()
            if self.tok.type == "LANGTAG":
                lang = self.advance().text
                return Literal(tok.text, language=lang)
            if self.tok.type == "PUNCT" and self.tok.text == "^^":
                self.advance()
                dt_tok = self.tok
                if dt_tok.type not in ("IRIREF", "PNAME"):
                    raise self.error(f"expected datatype IRI, found {self._describe(dt_tok)}")
                self.advance()
                return Literal(tok.text, self.iri(dt_tok).value)
            return Literal(tok.text)
        if tok.type == "PUNCT" and tok.text in "([":
            raise self._unsupported(tok)
        raise self.error(f"expected object, found {self._describe(tok)}")


def parse_turtle(text: str, source: Optional[str] = None) -> Graph:
    """Parse a Turtle document into a new :class:`Graph` (prefixes preserved)."""
    return _TurtleParser(text, source).parse()


def read_turtle(path: Union[str, Path]) -> Graph:
    path = Path(path)
    return parse_turtle(path.read_text(encoding="utf-8"), source=str(path))


# -- writer -----------------------------------------------------------------

_INTEGER_SHORT = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL_SHORT = re.compile(r"^[+-]?[0-9]*\.[0-9]+$")
_DOUBLE_SHORT = re.compile(r"^[+-]?(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)[eE][+-]?[0-9]+$")
_BNODE_LABEL = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$")
_IRI_FORBIDDEN = set(' <>"{}|^`\\')


def _escape_iri(value: str) -> str:
    out = []
    for ch in value:
        if ch in _IRI_FORBIDDEN or ord(ch) <= 0x20:
            out.append("\\u%04X" % ord(ch) if ord(ch) <= 0xFFFF else "\\U%08X" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


class _Writer:
    def __init__(self, prefixes: PrefixMap):
        self.prefixes = prefixes
        self.bnodes: Dict[str, str] = {}

    def iri(self, iri: Union[IRI, str]) -> str:
        compacted = self.prefixes.compact(iri)
        if compacted.startswith("<"):
            value = iri.value if isinstance(iri, IRI) else iri
            return f"<{_escape_iri(value)}>"
        return compacted

    def bnode(self, node: BNode) -> str:
        label = node.label
        if label not in self.bnodes:
            self.bnodes[label] = label if _BNODE_LABEL.match(label) else f"b{len(self.bnodes)}"
        return "_:" + self.bnodes[label]

    def literal(self, lit: Literal) -> str:
        dt, lex = lit.datatype, lit.lexical
        if dt == XSD_INTEGER and _INTEGER_SHORT.match(lex):
            return lex
        if dt == XSD_DECIMAL and _DECIMAL_SHORT.match(lex):
            return lex
        if dt == XSD_DOUBLE and _DOUBLE_SHORT.match(lex):
            return lex
        if dt == XSD_BOOLEAN and lex in ("true", "false"):
            return lex
        body = Literal(lex).n3()
        if lit.language is not None:
            return f"{body}@{lit.language}"
        if dt is not None:
            return f"{body}^^{self.iri(dt)}"
        return body

    def term(self, term: Term) -> str:
        if isinstance(term, IRI):
            return self.iri(term)
        if isinstance(term, BNode):
            return self.bnode(term)
        return self.literal(term)


def serialize_turtle(graph: Graph) -> str:
    """Deterministic Turtle text: prefixes by label, then triples sorted by (s, p, o).

    Triples sharing a subject are grouped with ``;`` and ``,``; ``a`` comes first.
    """
    prefixes = PrefixMap(graph.prefixes)
    writer = _Writer(prefixes)
    lines: List[str] = []
    for label in sorted(prefixes):
        lines.append(f"@prefix {label}: <{_escape_iri(prefixes[label])}> .")
    by_subject: Dict[Term, Dict[Term, List[Term]]] = {}
    for t in graph:
        by_subject.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)
    if lines and by_subject:
        lines.append("")
    for s in sorted(by_subject, key=sort_key):
        preds = by_subject[s]
        parts = []
        for p in sorted(preds, key=lambda p: (p != RDF_TYPE, sort_key(p))):
            verb = "a" if p == RDF_TYPE else writer.iri(p)
            objs = ", ".join(writer.term(o) for o in sorted(preds[p], key=sort_key))
            parts.append(f"{verb} {objs}")
        lines.append(writer.term(s) + " " + " ;\n    ".join(parts) + " .")
    return "\n".join(lines) + ("\n" if lines else "")
