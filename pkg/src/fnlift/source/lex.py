"""Lossless tokenizer for Rust source.

Tokens cover the byte string exactly: concatenating every token's slice
reproduces the input. Unknown bytes become `err` tokens instead of aborting,
so malformed files still tokenize (error tolerance happens here first).

Offsets are byte offsets into the UTF-8 encoding of the file, which is the
unit the wire protocol and the compiler's JSON diagnostics both use.
"""

from __future__ import annotations

import re
from typing import NamedTuple

KEYWORDS = frozenset(
    """as async await break const continue crate dyn else enum extern false fn
    for if impl in let loop match mod move mut pub ref return self Self static
    struct super trait true type unsafe use where while union macro_rules
    """.split()
)

# Single master pattern for everything that does not need stateful scanning.
# Strings, comments and raw strings are handled by hand below because of
# nesting and arbitrary hash counts.
_SIMPLE = re.compile(
    rb"""
      (?P<ws>[\ \t\r\n]+)
    | (?P<lifetime>'[A-Za-z_][A-Za-z0-9_]*(?!'))
    | (?P<char>'(?:\\.|[^\\'])')
    | (?P<num>
        0[xX][0-9a-fA-F_]+[a-zA-Z0-9_]*
      | 0[oO][0-7_]+[a-zA-Z0-9_]*
      | 0[bB][01_]+[a-zA-Z0-9_]*
      | [0-9][0-9_]*\.[0-9][0-9_]*(?:[eE][+-]?[0-9_]+)?(?:f32|f64)?
      | [0-9][0-9_]*(?:[eE][+-]?[0-9_]+)?[a-zA-Z0-9_]*
      )
    | (?P<ident>r\#[A-Za-z_][A-Za-z0-9_]*|[A-Za-z_][A-Za-z0-9_]*)
    | (?P<open>[\(\[\{])
    | (?P<close>[\)\]\}])
    | (?P<punct>[!@\#$%^&*\-+=|;:,<.>/?~'])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str  # ws comment ident lifetime num str char punct open close err
    start: int
    end: int


class TokenStream:
    """Token list plus the byte buffer they index into."""

    def __init__(self, data: bytes, tokens: list[Token]):
        self.data = data
        self.tokens = tokens
        self._pair: dict[int, int] | None = None

    def text(self, tok: Token) -> str:
        return self.data[tok.start : tok.end].decode("utf-8", "replace")

    def slice(self, start: int, end: int) -> str:
        return self.data[start:end].decode("utf-8", "replace")

    def is_trivia(self, i: int) -> bool:
        return self.tokens[i].kind in ("ws", "comment")

    def match_of(self, i: int) -> int | None:
        """Index of the delimiter matching token i, or None if unbalanced."""
        if self._pair is None:
            self._pair = _pair_delims(self.tokens, self.data)
        return self._pair.get(i)

    def skip_trivia(self, i: int, step: int = 1) -> int:
        n = len(self.tokens)
        while 0 <= i < n and self.is_trivia(i):
            i += step
        return i

    def arrow_at(self, j: int) -> bool:
        """True when tokens j, j+1 spell `->` (so the `>` is not an angle)."""
        if j + 1 >= len(self.tokens):
            return False
        a, b = self.tokens[j], self.tokens[j + 1]
        return (
            a.kind == "punct"
            and b.kind == "punct"
            and a.end == b.start
            and self.data[a.start : b.end] == b"->"
        )


def _scan_block_comment(data: bytes, i: int) -> int:
    # /* ... */ with nesting; unterminated comments run to EOF.
    depth = 0
    n = len(data)
    j = i
    while j < n:
        if data[j : j + 2] == b"/*":
            depth += 1
            j += 2
        elif data[j : j + 2] == b"*/":
            depth -= 1
            j += 2
            if depth == 0:
                return j
        else:
            j += 1
    return n


def _scan_string(data: bytes, i: int) -> int:
    # i points at the opening quote
    n = len(data)
    j = i + 1
    while j < n:
        c = data[j]
        if c == 0x5C:  # backslash
            j += 2
        elif c == 0x22:  # closing quote
            return j + 1
        else:
            j += 1
    return n


def _scan_raw_string(data: bytes, i: int) -> int | None:
    # r"..." / r#"..."# / br##"..."## ; i points at 'r'
    j = i + 1
    hashes = 0
    while j < len(data) and data[j] == 0x23:
        hashes += 1
        j += 1
    if j >= len(data) or data[j] != 0x22:
        return None
    close = b'"' + b"#" * hashes
    k = data.find(close, j + 1)
    return len(data) if k < 0 else k + len(close)


def tokenize(data: bytes) -> TokenStream:
    tokens: list[Token] = []
    i = 0
    n = len(data)
    append = tokens.append
    while i < n:
        two = data[i : i + 2]
        if two == b"//":
            j = data.find(b"\n", i)
            j = n if j < 0 else j  # newline stays in the following ws token
            append(Token("comment", i, j))
            i = j
            continue
        if two == b"/*":
            j = _scan_block_comment(data, i)
            append(Token("comment", i, j))
            i = j
            continue
        c = data[i]
        if c == 0x22:  # "
            j = _scan_string(data, i)
            append(Token("str", i, j))
            i = j
            continue
        if c == 0x72 and i + 1 < n and data[i + 1] in (0x22, 0x23):  # r" / r#
            j = _scan_raw_string(data, i)
            if j is not None:
                append(Token("str", i, j))
                i = j
                continue
        if c == 0x62 and i + 1 < n:  # b" / br" / br#
            if data[i + 1] == 0x22:
                j = _scan_string(data, i + 1)
                append(Token("str", i, j))
                i = j
                continue
            if data[i + 1] == 0x72 and i + 2 < n and data[i + 2] in (0x22, 0x23):
                j = _scan_raw_string(data, i + 1)
                if j is not None:
                    append(Token("str", i, j))
                    i = j
                    continue
        m = _SIMPLE.match(data, i)
        if m is None:
            append(Token("err", i, i + 1))
            i += 1
            continue
        kind = m.lastgroup or "err"
        append(Token(kind, m.start(), m.end()))
        i = m.end()
    return TokenStream(data, tokens)


def _pair_delims(tokens: list[Token], data: bytes) -> dict[int, int]:
    """Match () [] {} tolerantly: mismatched delimiters are left unpaired."""
    pair: dict[int, int] = {}
    stack: list[tuple[int, int]] = []  # (token index, open byte)
    closer_for = {0x28: 0x29, 0x5B: 0x5D, 0x7B: 0x7D}
    for idx, tok in enumerate(tokens):
        if tok.kind == "open":
            stack.append((idx, data[tok.start]))
        elif tok.kind == "close":
            want = data[tok.start]
            # pop until a matching opener; unmatched openers stay unpaired
            while stack:
                oidx, ob = stack[-1]
                if closer_for[ob] == want:
                    stack.pop()
                    pair[oidx] = idx
                    pair[idx] = oidx
                    break
                stack.pop()
            # unmatched closer: no pair entry
    return pair
