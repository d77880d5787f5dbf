"""Finitely described infinite binary tapes.

A :class:`Tape` is a declarative base generator plus a finite map of
overridden cells.  Writes only ever touch the override map, so every tape
produced during one run shares the base it started with, and snapshot
equality reduces to comparing override maps.

Binary relations on omega are coded with Cantor pairing:
``x[pair(i, j)] == 1`` iff ``i`` precedes ``j``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Tuple, Union

__all__ = [
    "Fin", "Omega", "OmegaStar", "Sum", "Prod", "OrderSpec",
    "Const", "Periodic", "OrderCode", "BitGenerator",
    "Tape", "BaseMismatch", "ExpressionError",
    "pair", "unpair", "precedes", "gen_bit", "read", "write",
    "tapes_equal", "block_limsup",
    "parse_spec", "format_spec", "parse_generator", "format_generator",
    "parse_tape", "format_tape",
]


class BaseMismatch(ValueError):
    """Tapes over different base generators were combined."""


class ExpressionError(ValueError):
    pass


# -- order specifications ------------------------------------------------------

@dataclass(frozen=True)
class Fin:
    n: int


@dataclass(frozen=True)
class Omega:
    pass


@dataclass(frozen=True)
class OmegaStar:
    pass


@dataclass(frozen=True)
class Sum:
    left: "OrderSpec"
    right: "OrderSpec"


@dataclass(frozen=True)
class Prod:
    inner: "OrderSpec"
    outer: "OrderSpec"


OrderSpec = Union[Fin, Omega, OmegaStar, Sum, Prod]


def pair(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def unpair(n: int) -> Tuple[int, int]:
    d = (math.isqrt(8 * n + 1) - 1) // 2
    j = n - d * (d + 1) // 2
    return d - j, j


def precedes(spec: OrderSpec, i: int, j: int) -> bool:
    """The coded relation: does field element ``i`` come before ``j``?

    Every spec orders all of omega.  ``Fin(n)`` lists 0..n-1 and then the
    surplus elements in their natural order, which is the natural order.
    """
    if isinstance(spec, (Fin, Omega)):
        return i < j
    if isinstance(spec, OmegaStar):
        return i > j
    if isinstance(spec, Sum):
        if i % 2 != j % 2:
            return i % 2 == 0
        part = spec.left if i % 2 == 0 else spec.right
        return precedes(part, i // 2, j // 2)
    if isinstance(spec, Prod):
        (a, b), (c, d) = unpair(i), unpair(j)
        if b != d:
            return precedes(spec.outer, b, d)
        return precedes(spec.inner, a, c)
    raise TypeError(f"not an order spec: {spec!r}")


# -- base generators -------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    bit: int

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")


def _primitive_root(cycle: Tuple[int, ...]) -> Tuple[int, ...]:
    n = len(cycle)
    for k in range(1, n + 1):
        if n % k == 0 and cycle[:k] * (n // k) == cycle:
            return cycle[:k]
    return cycle


@dataclass(frozen=True)
class Periodic:
    """``prefix`` followed by ``cycle`` repeated forever, kept canonical."""

    prefix: Tuple[int, ...]
    cycle: Tuple[int, ...]

    def __post_init__(self):
        prefix, cycle = tuple(self.prefix), tuple(self.cycle)
        if not cycle:
            raise ValueError("cycle must be nonempty")
        if any(b not in (0, 1) for b in prefix + cycle):
            raise ValueError("bits must be 0 or 1")
        cycle = _primitive_root(cycle)
        while prefix and prefix[-1] == cycle[-1]:
            prefix, cycle = prefix[:-1], (cycle[-1],) + cycle[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "cycle", cycle)


@dataclass(frozen=True)
class OrderCode:
    spec: OrderSpec


BitGenerator = Union[Const, Periodic, OrderCode]


@lru_cache(maxsize=1 << 16)
def _order_bit(spec, n: int) -> int:
    return int(precedes(spec, *unpair(n)))


def gen_bit(g: BitGenerator, n: int) -> int:
    if isinstance(g, Const):
        return g.bit
    if isinstance(g, Periodic):
        if n < len(g.prefix):
            return g.prefix[n]
        return g.cycle[(n - len(g.prefix)) % len(g.cycle)]
    if isinstance(g, OrderCode):
        return _order_bit(g.spec, n)
    raise TypeError(f"not a bit generator: {g!r}")


# -- tapes ---------------------------------------------------------------------

class Tape:
    """Immutable tape: base generator plus a normalized override map."""

    __slots__ = ("base", "_cells", "_key", "_hash")

    def __init__(self, base: BitGenerator, overrides: Mapping[int, int] = None):
        self.base = base
        cells = {}
        for pos, bit in (overrides or {}).items():
            if pos < 0 or bit not in (0, 1):
                raise ValueError(f"bad override {pos}:{bit}")
            if gen_bit(base, pos) != bit:
                cells[pos] = bit
        self._cells = cells
        self._key = None
        self._hash = _cells_hash(cells)

    @classmethod
    def _raw(cls, base, cells, h=None):
        t = cls.__new__(cls)
        t.base, t._cells, t._key = base, cells, None
        t._hash = _cells_hash(cells) if h is None else h
        return t

    @property
    def overrides(self) -> Tuple[Tuple[int, int], ...]:
        if self._key is None:
            self._key = tuple(sorted(self._cells.items()))
        return self._key

    def __getitem__(self, n: int) -> int:
        bit = self._cells.get(n)
        return gen_bit(self.base, n) if bit is None else bit

    def touched(self) -> Iterable[int]:
        return self._cells.keys()

    def __eq__(self, other):
        if not isinstance(other, Tape):
            return NotImplemented
        return self.base == other.base and self._cells == other._cells

    def __hash__(self):
        return self._hash ^ hash(self.base)

    def __repr__(self):
        return f"Tape({format_tape(self)!r})"


def _cells_hash(cells) -> int:
    # xor of item hashes, so single writes update it in constant time
    h = 0
    for item in cells.items():
        h ^= hash(item)
    return h


def read(t: Tape, n: int) -> int:
    return t[n]


def write(t: Tape, n: int, b: int) -> Tape:
    if t[n] == b:
        return t
    cells = dict(t._cells)
    h = t._hash
    if gen_bit(t.base, n) == b:
        del cells[n]
        h ^= hash((n, 1 - b))
    else:
        cells[n] = b
        h ^= hash((n, b))
    return Tape._raw(t.base, cells, h)


def tapes_equal(a: Tape, b: Tape) -> bool:
    if a.base != b.base:
        raise BaseMismatch(f"{format_generator(a.base)} vs {format_generator(b.base)}")
    return a._cells == b._cells


def block_limsup(ts) -> Tape:
    """Cellwise maximum of a block of tapes sharing one base."""
    ts = list(ts)
    if not ts:
        raise ValueError("block_limsup needs at least one tape")
    base = ts[0].base
    touched = set()
    for t in ts:
        if t.base != base:
            raise BaseMismatch(f"{format_generator(t.base)} vs {format_generator(base)}")
        touched.update(t._cells)
    cells = {}
    for n in touched:
        bit = max(t[n] for t in ts)
        if bit != gen_bit(base, n):
            cells[n] = bit
    return Tape._raw(base, cells)


# -- expression grammar --------------------------------------------------------

def format_spec(s: OrderSpec) -> str:
    if isinstance(s, Fin):
        return f"fin({s.n})"
    if isinstance(s, Omega):
        return "omega"
    if isinstance(s, OmegaStar):
        return "omegastar"
    if isinstance(s, Sum):
        return f"sum({format_spec(s.left)},{format_spec(s.right)})"
    if isinstance(s, Prod):
        return f"prod({format_spec(s.inner)},{format_spec(s.outer)})"
    raise TypeError(s)


def format_generator(g: BitGenerator) -> str:
    if isinstance(g, Const):
        return f"const({g.bit})"
    if isinstance(g, Periodic):
        bits = lambda bs: "".join(map(str, bs))
        return f"periodic({bits(g.prefix)};{bits(g.cycle)})"
    if isinstance(g, OrderCode):
        return f"ordercode({format_spec(g.spec)})"
    raise TypeError(g)


def format_tape(t: Tape) -> str:
    cells = ",".join(f"{p}:{b}" for p, b in t.overrides)
    return f"{format_generator(t.base)}{{{cells}}}"


_WORD = re.compile(r"\s*([a-z]+|\d+|[(),;{}:])")


class _Reader:
    def __init__(self, text):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _WORD.match(text, pos)
            if not m:
                raise ExpressionError(f"unexpected character at {pos} in {text!r}")
            self.toks.append(m.group(1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want=None):
        tok = self.peek()
        if tok is None or (want is not None and tok != want):
            raise ExpressionError(f"expected {want or 'more input'} in {self.text!r}")
        self.i += 1
        return tok

    def done(self):
        if self.i != len(self.toks):
            raise ExpressionError(f"trailing input in {self.text!r}")

    def bits(self):
        tok = self.peek()
        if tok is not None and tok.isdigit():
            self.take()
            if set(tok) - {"0", "1"}:
                raise ExpressionError(f"not a bit string: {tok!r}")
            return tuple(int(c) for c in tok)
        return ()

    def spec(self) -> OrderSpec:
        word = self.take()
        if word == "omega":
            return Omega()
        if word == "omegastar":
            return OmegaStar()
        if word == "fin":
            self.take("(")
            n = self.take()
            if not n.isdigit():
                raise ExpressionError(f"fin needs a natural number in {self.text!r}")
            self.take(")")
            return Fin(int(n))
        if word in ("sum", "prod"):
            self.take("(")
            a = self.spec()
            self.take(",")
            b = self.spec()
            self.take(")")
            return Sum(a, b) if word == "sum" else Prod(a, b)
        raise ExpressionError(f"unknown order spec {word!r}")

    def generator(self) -> BitGenerator:
        word = self.take()
        self.take("(")
        if word == "const":
            bit = self.take()
            if bit not in ("0", "1"):
                raise ExpressionError(f"const needs 0 or 1 in {self.text!r}")
            g = Const(int(bit))
        elif word == "periodic":
            prefix = self.bits()
            self.take(";")
            cycle = self.bits()
            if not cycle:
                raise ExpressionError(f"periodic needs a nonempty cycle in {self.text!r}")
            g = Periodic(prefix, cycle)
        elif word == "ordercode":
            g = OrderCode(self.spec())
        else:
            raise ExpressionError(f"unknown generator {word!r}")
        self.take(")")
        return g

    def overrides(self):
        cells = {}
        if self.peek() != "{":
            return cells
        self.take("{")
        while self.peek() != "}":
            pos = self.take()
            self.take(":")
            bit = self.take()
            if not pos.isdigit() or bit not in ("0", "1"):
                raise ExpressionError(f"bad override in {self.text!r}")
            cells[int(pos)] = int(bit)
            if self.peek() == ",":
                self.take(",")
        self.take("}")
        return cells


def parse_spec(text: str) -> OrderSpec:
    r = _Reader(text)
    s = r.spec()
    r.done()
    return s


def parse_generator(text: str) -> BitGenerator:
    r = _Reader(text)
    g = r.generator()
    r.done()
    return g


def parse_tape(text: str) -> Tape:
    """A generator expression optionally followed by ``{pos:bit,...}``."""
    r = _Reader(text)
    g = r.generator()
    cells = r.overrides()
    r.done()
    return Tape(g, cells)
