"""Tokenizer for the benchmark SQL dialect."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

# Word tokens the parser treats as reserved (cannot be bare aliases).
KEYWORDS = frozenset(
    """
    select distinct from where group by having order limit offset as on and or
    not in like glob between is null join inner left right full outer cross
    union intersect except exists case when then else end cast asc desc all
    """.split()
)

_TWO_CHAR_OPS = ("<=", ">=", "<>", "!=", "||")
_ONE_CHAR_OPS = "=<>+-*/%(),."


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT STRING DQUOTED BACKTICK BRACKET NUMBER OP EOF
    value: str
    pos: int  # byte offset into the source

    @property
    def upper(self) -> str:
        return self.value.upper()


def _scan_quoted(text: str, i: int, close: str) -> tuple[str, int]:
    """Scan a quoted token starting after the opening quote; doubling escapes
    the close character for ' and " quotes."""
    out: list[str] = []
    n = len(text)
    j = i
    while j < n:
        ch = text[j]
        if ch == close:
            if close in "'\"" and j + 1 < n and text[j + 1] == close:
                out.append(close)
                j += 2
                continue
            return "".join(out), j + 1
        out.append(ch)
        j += 1
    raise ParseError("unterminated quoted token", i - 1, expected=close)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("--", i):
            nl = text.find("\n", i)
            i = n if nl < 0 else nl + 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseError("unterminated block comment", i)
            i = end + 2
            continue
        if ch == "'":
            body, i2 = _scan_quoted(text, i + 1, "'")
            tokens.append(Token("STRING", body, i))
            i = i2
            continue
        if ch == '"':
            body, i2 = _scan_quoted(text, i + 1, '"')
            tokens.append(Token("DQUOTED", body, i))
            i = i2
            continue
        if ch == "`":
            body, i2 = _scan_quoted(text, i + 1, "`")
            tokens.append(Token("BACKTICK", body, i))
            i = i2
            continue
        if ch == "[":
            end = text.find("]", i + 1)
            if end < 0:
                raise ParseError("unterminated bracket identifier", i, expected="]")
            tokens.append(Token("BRACKET", text[i + 1 : end], i))
            i = end + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            seen_exp = False
            while j < n:
                c = text[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j + 1 < n and (
                    text[j + 1].isdigit() or text[j + 1] in "+-"
                ):
                    seen_exp = True
                    j += 2 if text[j + 1] in "+-" else 1
                else:
                    break
            tokens.append(Token("NUMBER", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], i))
            i = j
            continue
        if text[i : i + 2] in _TWO_CHAR_OPS:
            tokens.append(Token("OP", text[i : i + 2], i))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token("OP", ch, i))
            i += 1
            continue
        if ch == ";":
            # statement terminator; parser requires it to be trailing
            tokens.append(Token("OP", ";", i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(Token("EOF", "", n))
    return tokens


def is_keyword(tok: Token, word: str) -> bool:
    return tok.kind == "IDENT" and tok.upper == word.upper()
