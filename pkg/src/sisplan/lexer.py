"""Tokenizer shared by the Turtle reader and the query parser."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional


class ParseError(ValueError):
    """Positioned parse failure. ``kind`` is lexical, syntactic or unknown-prefix."""

    def __init__(self, message: str, line: int, column: int, kind: str = "syntactic",
                 source: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.kind = kind
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f"{self.source}:" if self.source else ""
        return f"{where}{self.line}:{self.column}: {self.kind} error: {self.message}"


@dataclass(frozen=True)
class Token:
    type: str
    text: str       # decoded value (string body, IRI, name, ...)
    raw: str        # exact source text
    line: int
    column: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.raw)


_PN_CHARS_BASE = (
    "A-Za-zÀ-ÖØ-öø-˿Ͱ-ͽͿ-῿"
    "‌-‍⁰-↏Ⰰ-⿯、-퟿豈-﷏ﷰ-�"
)
_PN_CHARS = _PN_CHARS_BASE + "_0-9\\-·̀-ͯ‿-⁀"
_NAME_RE = re.compile(f"[{_PN_CHARS_BASE}_0-9](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?")
_PREFIX_RE = re.compile(f"(?:[{_PN_CHARS_BASE}](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?)?:")
_LOCAL_RE = re.compile(
    f"(?:[{_PN_CHARS_BASE}_:0-9]|%[0-9A-Fa-f]{{2}}|\\\\[_~.\\-!$&'()*+,;=/?#@%])"
    f"(?:(?:[{_PN_CHARS}.:]|%[0-9A-Fa-f]{{2}}|\\\\[_~.\\-!$&'()*+,;=/?#@%])*"
    f"(?:[{_PN_CHARS}:]|%[0-9A-Fa-f]{{2}}|\\\\[_~.\\-!$&'()*+,;=/?#@%]))?"
)
_NUMBER_RE = re.compile(
    r"[+-]?(?:(?:[0-9]+\.[0-9]*[eE][+-]?[0-9]+|\.[0-9]+[eE][+-]?[0-9]+|[0-9]+[eE][+-]?[0-9]+)"
    r"|[0-9]*\.[0-9]+|[0-9]+)"
)
_LANG_RE = re.compile(r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_VAR_RE = re.compile(f"[?$][{_PN_CHARS_BASE}_0-9][{_PN_CHARS_BASE}_0-9·̀-ͯ‿-⁀]*")
_BNODE_RE = re.compile(f"_:[{_PN_CHARS_BASE}_0-9](?:[{_PN_CHARS}.]*[{_PN_CHARS}])?")
_PUNCT = {".", ";", ",", "{", "}", "(", ")", "[", "]", "*", "|", "/", "!", "=", "+", "&", ">", "<"}
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


class Lexer:
    def __init__(self, text: str, allow_variables: bool = False, source: Optional[str] = None):
        self.text = text
        self.allow_variables = allow_variables
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str, kind: str = "lexical", line=None, column=None) -> ParseError:
        return ParseError(message, line or self.line, column or self.col, kind, self.source)

    def _advance(self, n: int) -> str:
        chunk = self.text[self.pos:self.pos + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return chunk

    def _skip_ws(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
            elif ch == "#":
                end = text.find("\n", self.pos)
                self._advance((len(text) if end < 0 else end) - self.pos)
            else:
                break

    def tokens(self) -> List[Token]:
        out = []
        while True:
            tok = self.next()
            out.append(tok)
            if tok.type == "EOF":
                return out

    def _tok(self, type_: str, text: str, start: int, line: int, col: int) -> Token:
        return Token(type_, text, self.text[start:self.pos], line, col, start)

    def next(self) -> Token:
        self._skip_ws()
        text, start, line, col = self.text, self.pos, self.line, self.col
        if start >= len(text):
            return Token("EOF", "", "", line, col, start)
        ch = text[start]

        if ch == "<":
            return self._iri(start, line, col)
        if ch in "\"'":
            return self._string(start, line, col)
        if ch == "@":
            m = _LANG_RE.match(text, start)
            if not m:
                raise self.error("malformed language tag or directive")
            self._advance(m.end() - start)
            word = m.group()[1:]
            if word in ("prefix", "base"):
                return self._tok("DIRECTIVE", word, start, line, col)
            return self._tok("LANGTAG", word, start, line, col)
        if ch == "^":
            if text.startswith("^^", start):
                self._advance(2)
                return self._tok("PUNCT", "^^", start, line, col)
            self._advance(1)
            return self._tok("PUNCT", "^", start, line, col)
        if ch in "?$":
            m = _VAR_RE.match(text, start)
            if not self.allow_variables or not m:
                raise self.error(f"unexpected character {ch!r}")
            self._advance(m.end() - start)
            return self._tok("VAR", m.group()[1:], start, line, col)
        if ch == "_" and text.startswith("_:", start):
            m = _BNODE_RE.match(text, start)
            if not m:
                raise self.error("malformed blank node label")
            self._advance(m.end() - start)
            return self._tok("BNODE", m.group()[2:], start, line, col)
        if ch.isdigit() or (ch in "+-." and start + 1 < len(text)
                            and (text[start + 1].isdigit()
                                 or (text[start + 1] == "." and ch in "+-"))):
            m = _NUMBER_RE.match(text, start)
            if m and m.end() > start and any(c.isdigit() for c in m.group()):
                lexeme = m.group()
                self._advance(len(lexeme))
                if "e" in lexeme or "E" in lexeme:
                    type_ = "DOUBLE"
                elif "." in lexeme:
                    type_ = "DECIMAL"
                else:
                    type_ = "INTEGER"
                return self._tok(type_, lexeme, start, line, col)
        m = _PREFIX_RE.match(text, start)
        if m:
            prefix = m.group()[:-1]
            self._advance(m.end() - start)
            lm = _LOCAL_RE.match(text, self.pos)
            local = ""
            if lm:
                local = lm.group()
                self._advance(len(local))
                local = re.sub(r"\\(.)", r"\1", local)
            return Token("PNAME", prefix + ":" + local, text[start:self.pos], line, col, start)
        m = _NAME_RE.match(text, start)
        if m:
            self._advance(m.end() - start)
            return self._tok("NAME", m.group(), start, line, col)
        if ch in _PUNCT:
            self._advance(1)
            return self._tok("PUNCT", ch, start, line, col)
        raise self.error(f"unexpected character {ch!r}")

    def _error_at(self, i: int, message: str) -> ParseError:
        chunk = self.text[self.pos:i]
        nl = chunk.count("\n")
        if nl:
            column = i - self.text.rfind("\n", 0, i)
        else:
            column = self.col + len(chunk)
        return ParseError(message, self.line + nl, column, "lexical", self.source)

    def _unicode_escape(self, i: int, width: int) -> str:
        hexpart = self.text[i:i + width]
        if len(hexpart) < width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
            raise self._error_at(i - 2, "malformed unicode escape")
        cp = int(hexpart, 16)
        if cp > 0x10FFFF or 0xD800 <= cp <= 0xDFFF:
            raise self._error_at(i - 2, "unicode escape out of range")
        return chr(cp)

    def _iri(self, start: int, line: int, col: int) -> Token:
        text = self.text
        i = start + 1
        out = []
        while True:
            if i >= len(text):
                raise self._error_at(start, "unterminated IRI")
            ch = text[i]
            if ch == ">":
                break
            if ch == "\\":
                kind = text[i + 1:i + 2]
                if kind == "u":
                    out.append(self._unicode_escape(i + 2, 4))
                    i += 6
                    continue
                if kind == "U":
                    out.append(self._unicode_escape(i + 2, 8))
                    i += 10
                    continue
                raise self._error_at(i, "invalid escape in IRI")
            if ch in ' <"{}|^`\n\r\t' or ord(ch) <= 0x20:
                if self.allow_variables and ch in " \n\r\t":
                    # query mode: a lone '<' is a comparison operator
                    self._advance(1)
                    return self._tok("PUNCT", "<", start, line, col)
                raise self._error_at(i, f"invalid character {ch!r} in IRI")
            out.append(ch)
            i += 1
        self._advance(i + 1 - start)
        return self._tok("IRIREF", "".join(out), start, line, col)

    def _string(self, start: int, line: int, col: int) -> Token:
        text = self.text
        q = text[start]
        long_ = text.startswith(q * 3, start)
        delim = q * 3 if long_ else q
        i = start + len(delim)
        out = []
        while True:
            if i >= len(text):
                raise self._error_at(start, "unterminated string literal")
            if text.startswith(delim, i):
                if long_:
                    # a run of more than three quotes closes on the last three
                    while text.startswith(q, i + 3):
                        out.append(q)
                        i += 1
                i += len(delim)
                break
            ch = text[i]
            if ch == "\\":
                kind = text[i + 1:i + 2]
                if kind == "u":
                    out.append(self._unicode_escape(i + 2, 4))
                    i += 6
                elif kind == "U":
                    out.append(self._unicode_escape(i + 2, 8))
                    i += 10
                elif kind in _ECHAR:
                    out.append(_ECHAR[kind])
                    i += 2
                else:
                    raise self._error_at(i, "invalid escape sequence in string")
                continue
            if not long_ and ch in "\n\r":
                raise self._error_at(i, "newline in short string literal")
            out.append(ch)
            i += 1
        self._advance(i - start)
        return self._tok("STRING", "".join(out), start, line, col)
