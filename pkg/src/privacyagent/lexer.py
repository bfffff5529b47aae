"""Shared tokenizer for the PPF family of text formats (.ppf, .apr, .pdr, .prf, .ovr).

Token rules: lowercase identifiers ``[a-z][a-z0-9-]*``, dotted paths,
double-quoted strings with ``\\"`` and ``\\\\`` escapes, ``#`` comments to end
of line, insignificant whitespace, and the punctuation ``{ } ( ) ,``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class ParseError(Exception):
    """Raised on any malformed document; pinpoints the first failure."""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}")


IDENT = "ident"
STRING = "string"
LBRACE = "{"
RBRACE = "}"
LPAREN = "("
RPAREN = ")"
COMMA = ","
EOF = "eof"

_IDENT_RE = re.compile(r"[a-z][a-z0-9-]*(?:\.[a-z][a-z0-9-]*)*")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    """Tokenize a document; total on arbitrary input (raises ParseError, never crashes)."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "{}(),":
            tokens.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf: list[str] = []
            while True:
                if i >= n:
                    raise ParseError(start_line, start_col, "unterminated string")
                c = text[i]
                if c == "\n":
                    raise ParseError(start_line, start_col, "unterminated string")
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in '"\\':
                        raise ParseError(line, col, "invalid escape in string")
                    buf.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                buf.append(c)
                i += 1
                col += 1
            tokens.append(Token(STRING, "".join(buf), start_line, start_col))
            continue
        m = _IDENT_RE.match(text, i)
        if m and m.start() == i:
            tokens.append(Token(IDENT, m.group(0), line, col))
            col += len(m.group(0))
            i = m.end()
            continue
        raise ParseError(line, col, f"unexpected character {ch!r}")
    tokens.append(Token(EOF, "", line, col))
    return tokens


def escape_string(s: str) -> str:
    """Quote a string using the PPF escape rules."""
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


class TokenStream:
    """Cursor over a token list with the expect/accept helpers parsers need."""

    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    def peek(self) -> Token:
        return self._tokens[self._pos]

    def next(self) -> Token:
        tok = self._tokens[self._pos]
        if tok.kind != EOF:
            self._pos += 1
        return tok

    def at_end(self) -> bool:
        return self.peek().kind == EOF

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(tok.line, tok.column, message)

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"expected {kind!r}, found {self._describe(tok)}")
        return self.next()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != IDENT or tok.value != word:
            raise self.error(f"expected {word!r}, found {self._describe(tok)}")
        return self.next()

    def accept_keyword(self, word: str) -> bool:
        tok = self.peek()
        if tok.kind == IDENT and tok.value == word:
            self.next()
            return True
        return False

    def expect_string(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != STRING:
            raise self.error(f"expected {what} string, found {self._describe(tok)}")
        return self.next().value

    def expect_ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != IDENT:
            raise self.error(f"expected {what}, found {self._describe(tok)}")
        return self.next()

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == EOF:
            return "end of input"
        if tok.kind == STRING:
            return "string"
        return repr(tok.value)


def stream(text: str) -> TokenStream:
    return TokenStream(tokenize(text))
