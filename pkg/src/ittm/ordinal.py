"""Ordinals below epsilon_0 in Cantor normal form.

An ordinal is a tuple of ``(exponent, coefficient)`` terms with strictly
decreasing exponents, each exponent itself an :class:`Ordinal`.  Only the
operations the engine needs are provided: comparison, addition, successor,
limit tests and ``next_limit``.
"""
from __future__ import annotations

import re
from functools import total_ordering
from typing import Iterable, Tuple

__all__ = [
    "Ordinal", "OrdinalParseError", "ZERO", "ONE", "OMEGA",
    "cmp", "add", "succ", "is_limit", "next_limit", "omega_power",
    "parse", "format_ordinal",
]


class OrdinalParseError(ValueError):
    pass


@total_ordering
class Ordinal:
    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[Tuple["Ordinal", int]] = ()):
        terms = tuple(terms)
        for k, (e, c) in enumerate(terms):
            if not isinstance(e, Ordinal) or not isinstance(c, int) or c < 1:
                raise ValueError(f"bad CNF term {(e, c)!r}")
            if k and cmp(terms[k - 1][0], e) <= 0:
                raise ValueError("exponents must be strictly decreasing")
        self.terms = terms
        self._hash = None

    @classmethod
    def from_int(cls, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("ordinals are non-negative")
        return cls(((ZERO, n),)) if n else ZERO

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0].terms)

    def __int__(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.from_int(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other):
        if isinstance(other, int):
            other = Ordinal.from_int(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return cmp(self, other) < 0

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __add__(self, other):
        if isinstance(other, int):
            other = Ordinal.from_int(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other):
        if isinstance(other, int):
            return add(Ordinal.from_int(other), self)
        return NotImplemented

    def __str__(self):
        return format_ordinal(self)

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def cmp(a: Ordinal, b: Ordinal) -> int:
    """Three-way comparison: -1, 0 or 1."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = cmp(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    return (len(a.terms) > len(b.terms)) - (len(a.terms) < len(b.terms))


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    if not b.terms:
        return a
    lead, coeff = b.terms[0]
    kept = []
    for e, c in a.terms:
        order = cmp(e, lead)
        if order > 0:
            kept.append((e, c))
        elif order == 0:
            coeff += c
            break
        else:
            break
    return Ordinal(kept + [(lead, coeff)] + list(b.terms[1:]))


def succ(a: Ordinal) -> Ordinal:
    return add(a, ONE)


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and bool(a.terms[-1][0].terms)


def omega_power(e) -> Ordinal:
    """omega ** e for a natural number or ordinal exponent."""
    if isinstance(e, int):
        e = Ordinal.from_int(e)
    return Ordinal(((e, 1),))


def next_limit(a: Ordinal, k: int) -> Ordinal:
    """Least multiple of omega**k strictly greater than ``a``."""
    if k < 1:
        raise ValueError("k must be positive")
    level = Ordinal.from_int(k)
    head = Ordinal(t for t in a.terms if cmp(t[0], level) >= 0)
    return add(head, omega_power(level))


# -- text form ---------------------------------------------------------------

def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if not e.terms:
            parts.append(str(c))
            continue
        if e == ONE:
            s = "w"
        elif e.is_finite():
            s = f"w^{int(e)}"
        elif e == OMEGA:
            s = "w^w"
        else:
            s = f"w^({format_ordinal(e)})"
        if c > 1:
            s += f"*{c}"
        parts.append(s)
    return "+".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


class _Parser:
    def __init__(self, text: str):
        self.tokens = [(m.group(1), m.group(2)) for m in _TOKEN.finditer(text) if m.group(0).strip()]
        self.text = text
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self, sym=None):
        tok = self.peek()
        if tok == (None, None) or (sym is not None and tok[1] != sym):
            raise OrdinalParseError(f"expected {sym or 'token'} in {self.text!r}")
        self.pos += 1
        return tok

    def nat(self, allow_zero=False) -> int:
        num, _ = self.take()
        if num is None or (num.startswith("0") and num != "0"):
            raise OrdinalParseError(f"expected a natural number in {self.text!r}")
        n = int(num)
        if n == 0 and not allow_zero:
            raise OrdinalParseError(f"zero not allowed here in {self.text!r}")
        return n

    def ordinal(self) -> Ordinal:
        if self.peek()[0] == "0":
            self.take()
            return ZERO
        terms = [self.term()]
        while self.peek()[1] == "+":
            self.take("+")
            terms.append(self.term())
        for (e1, _), (e2, _) in zip(terms, terms[1:]):
            if cmp(e1, e2) <= 0:
                raise OrdinalParseError(f"not in Cantor normal form: {self.text!r}")
        return Ordinal(terms)

    def term(self):
        num, sym = self.peek()
        if num is not None:
            return (ZERO, self.nat())
        if sym != "w":
            raise OrdinalParseError(f"unexpected {sym!r} in {self.text!r}")
        self.take("w")
        exp = ONE
        if self.peek()[1] == "^":
            self.take("^")
            num, sym = self.peek()
            if num is not None:
                n = self.nat()
                if n == 1:
                    raise OrdinalParseError(f"write w, not w^1: {self.text!r}")
                exp = Ordinal.from_int(n)
            elif sym == "w":
                self.take("w")
                exp = OMEGA
            else:
                self.take("(")
                exp = self.ordinal()
                self.take(")")
                if exp.is_finite() or exp == OMEGA:
                    raise OrdinalParseError(f"needless parentheses in {self.text!r}")
        coeff = 1
        if self.peek()[1] == "*":
            self.take("*")
            coeff = self.nat()
            if coeff == 1:
                raise OrdinalParseError(f"coefficient 1 is implicit: {self.text!r}")
        return (exp, coeff)


def parse(text: str) -> Ordinal:
    """Parse canonical text such as ``w^2*3+w+5``; ``w^(w+1)`` for compound exponents."""
    p = _Parser(text)
    if not p.tokens:
        raise OrdinalParseError("empty ordinal")
    result = p.ordinal()
    if p.pos != len(p.tokens):
        raise OrdinalParseError(f"trailing input in {text!r}")
    return result
