"""Tiny shared tokenizer for the term and type grammars."""

from __future__ import annotations

from typing import NamedTuple


class ParseError(ValueError):
    """Raised on malformed input; carries the offending source position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Token(NamedTuple):
    kind: str  # "ident" or the literal punctuation text
    text: str
    pos: int


def tokenize(src: str, punctuation: tuple[str, ...]) -> list[Token]:
    """Split ``src`` into identifiers and the given punctuation marks.

    Identifiers are ASCII letters followed by letters/digits.  Longer
    punctuation marks must precede their prefixes in ``punctuation``.
    Whitespace is insignificant.
    """
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        for mark in punctuation:
            if src.startswith(mark, i):
                tokens.append(Token(mark, mark, i))
                i += len(mark)
                break
        else:
            if ch.isalpha() and ch.isascii():
                j = i + 1
                while j < n and src[j].isascii() and (src[j].isalpha() or src[j].isdigit()):
                    j += 1
                tokens.append(Token("ident", src[i:j], i))
                i = j
            else:
                raise ParseError(f"unexpected character {ch!r}", i)
    return tokens


class TokenStream:
    """Cursor over a token list with one-token lookahead."""

    def __init__(self, tokens: list[Token], end: int):
        self.tokens = tokens
        self.index = 0
        self.end = end  # length of the source, for EOF error positions

    def peek(self) -> Token | None:
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end)
        self.index += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text!r}", tok.pos)
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)
