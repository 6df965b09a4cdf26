"""Tokenizer for RT-lite.

Offsets are byte offsets into the UTF-8 encoding of the document, so spans
can be spliced without re-encoding.  Two pieces of context sensitivity exist:
after ``[`` everything up to ``]`` or the end of the line is one raw guard
token, and after a single ``/`` everything up to ``;`` or the end of the line
is one raw action token.  ``//`` starts a comment that runs to the end of the
line; comments are not recognised inside raw captures.

An illegal character produces E001, is skipped and lexing continues.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import KEYWORDS, SEVERITY_ERROR, Diagnostic, SourceSpan

T_IDENT = "ident"
T_KEYWORD = "keyword"
T_LBRACE = "lbrace"
T_RBRACE = "rbrace"
T_SEMI = "semi"
T_COLON = "colon"
T_DOT = "dot"
T_ARROW = "arrow"
T_TILDE = "tilde"
T_LBRACKET = "lbracket"
T_RBRACKET = "rbracket"
T_SLASH = "slash"
T_RAW = "raw"
T_EOF = "eof"

_PUNCT = {
    "{": T_LBRACE,
    "}": T_RBRACE,
    ";": T_SEMI,
    ":": T_COLON,
    ".": T_DOT,
    "~": T_TILDE,
    "[": T_LBRACKET,
    "]": T_RBRACKET,
}

_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_PART = re.compile(r"[A-Za-z0-9_]")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.start, self.end)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    """All tokens of the document (terminated by one EOF token) and any
    illegal-character diagnostics."""
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    n = len(text)
    i = 0
    # "none" | "guard" | "action"; set when the previous token opens a capture
    capture = "none"

    while i < n:
        ch = text[i]

        if capture != "none":
            stop = "]" if capture == "guard" else ";"
            j = i
            while j < n and text[j] != stop and text[j] != "\n":
                j += 1
            tokens.append(Token(T_RAW, text[i:j], i, j))
            i = j
            capture = "none"
            continue

        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "/":
            tokens.append(Token(T_SLASH, "/", i, i + 1))
            i += 1
            capture = "action"
            continue
        if ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token(T_ARROW, "->", i, i + 2))
                i += 2
            else:
                diags.append(
                    Diagnostic(
                        "E001", SEVERITY_ERROR, SourceSpan(i, i + 1), "illegal character '-'"
                    )
                )
                i += 1
            continue
        if ch in _PUNCT:
            kind = _PUNCT[ch]
            tokens.append(Token(kind, ch, i, i + 1))
            i += 1
            if kind == T_LBRACKET:
                capture = "guard"
            continue
        if _IDENT_START.match(ch):
            j = i + 1
            while j < n and _IDENT_PART.match(text[j]):
                j += 1
            word = text[i:j]
            kind = T_KEYWORD if word in KEYWORDS else T_IDENT
            tokens.append(Token(kind, word, i, j))
            i = j
            continue

        diags.append(
            Diagnostic(
                "E001", SEVERITY_ERROR, SourceSpan(i, i + 1), f"illegal character {ch!r}"
            )
        )
        i += 1

    tokens.append(Token(T_EOF, "", n, n))

    if not text.isascii():
        tokens, diags = _rebase_to_bytes(text, tokens, diags)
    return tokens, diags


def _rebase_to_bytes(
    text: str, tokens: list[Token], diags: list[Diagnostic]
) -> tuple[list[Token], list[Diagnostic]]:
    """Convert character offsets to byte offsets for non-ASCII documents."""
    offsets = [0] * (len(text) + 1)
    total = 0
    for idx, ch in enumerate(text):
        offsets[idx] = total
        total += len(ch.encode("utf-8"))
    offsets[len(text)] = total
    tokens = [
        Token(t.kind, t.text, offsets[t.start], offsets[t.end]) for t in tokens
    ]
    diags = [
        Diagnostic(
            d.code,
            d.severity,
            SourceSpan(offsets[d.span.start], offsets[d.span.end]),
            d.message,
        )
        for d in diags
    ]
    return tokens, diags
