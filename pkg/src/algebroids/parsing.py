"""Recursive-descent parser for polynomial expressions.

Grammar (whitespace-insensitive)::

    expr     := ("+"|"-")? term (("+"|"-") term)*
    term     := factor ("*" factor)*
    factor   := base ("^" nat)?
    base     := rational | var | "(" expr ")"
    rational := nat ("/" nat)?

Variables must match one of the declared names exactly.  Division only
appears inside rational literals, so ``1/2*x`` parses but ``x/2`` does not.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Poly


class ParseError(ValueError):
    """Syntax or name error, carrying the byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.reason = message


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


def is_valid_var_name(name: str) -> bool:
    return (
        bool(name)
        and name[0] in _IDENT_START
        and all(ch in _IDENT_CONT for ch in name)
    )


class _Tokens:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str | None:
        self._skip_ws()
        if self.pos >= len(self.src):
            return None
        return self.src[self.pos]

    def offset(self) -> int:
        self._skip_ws()
        return self.pos

    def take(self) -> str:
        ch = self.peek()
        if ch is None:
            raise ParseError("unexpected end of input", len(self.src))
        self.pos += 1
        return ch

    def take_nat(self) -> int:
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected a number", start)
        return int(self.src[start : self.pos])

    def take_ident(self) -> tuple[str, int]:
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.src) and self.src[self.pos] in _IDENT_CONT:
            self.pos += 1
        return self.src[start : self.pos], start


def parse_poly(src: str, var_names: Sequence[str]) -> Poly:
    """Parse ``src`` into a canonical polynomial over the named variables.

    Raises :class:`ParseError` with a byte offset on syntax errors, unknown
    variable names, and zero-denominator literals.
    """
    names = list(var_names)
    index_of = {name: i for i, name in enumerate(names)}
    n = len(names)
    toks = _Tokens(src)

    def parse_expr() -> Poly:
        sign = 1
        if toks.peek() in ("+", "-"):
            if toks.take() == "-":
                sign = -1
        result = parse_term() * sign
        while toks.peek() in ("+", "-"):
            op = toks.take()
            t = parse_term()
            result = result + t if op == "+" else result - t
        return result

    def parse_term() -> Poly:
        result = parse_factor()
        while toks.peek() == "*":
            toks.take()
            result = result * parse_factor()
        return result

    def parse_factor() -> Poly:
        base = parse_base()
        if toks.peek() == "^":
            toks.take()
            off = toks.offset()
            ch = toks.peek()
            if ch is None or not ch.isdigit():
                raise ParseError("expected a non-negative integer exponent", off)
            return base ** toks.take_nat()
        return base

    def parse_base() -> Poly:
        ch = toks.peek()
        off = toks.offset()
        if ch is None:
            raise ParseError("unexpected end of input", off)
        if ch == "(":
            toks.take()
            inner = parse_expr()
            if toks.peek() != ")":
                raise ParseError("expected ')'", toks.offset())
            toks.take()
            return inner
        if ch.isdigit():
            numerator = toks.take_nat()
            if toks.peek() == "/":
                toks.take()
                den_off = toks.offset()
                dch = toks.peek()
                if dch is None or not dch.isdigit():
                    raise ParseError("expected a denominator", den_off)
                denominator = toks.take_nat()
                if denominator == 0:
                    raise ParseError("zero denominator literal", den_off)
                return Poly.constant(Fraction(numerator, denominator), n)
            return Poly.constant(numerator, n)
        if ch in _IDENT_START:
            ident, start = toks.take_ident()
            idx = index_of.get(ident)
            if idx is None:
                raise ParseError(f"unknown variable {ident!r}", start)
            return Poly.variable(idx, n)
        raise ParseError(f"unexpected character {ch!r}", off)

    result = parse_expr()
    if toks.peek() is not None:
        raise ParseError(f"unexpected trailing input {toks.peek()!r}", toks.offset())
    return result
