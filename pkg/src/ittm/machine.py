"""Programs, snapshots and successor-step semantics.

One head is shared by the input, work and output tapes; each step reads the
bit-triple under it (plus the oracle bit when the program uses an oracle),
writes a bit-triple, and moves.  A left move at cell 0 leaves the head at 0.

Assembly format (``.itm``), ``#`` starts a comment::

    state start:
      on (_,_,_): write (_,_,1), move R, goto halt
    state limit:
      on (_,_,_): write same, move R, goto halt

``_`` in a scanned pattern matches either bit; in a write tuple it keeps
the scanned bit.  When several patterns match a case, the one with the
fewest wildcards wins; a tie between different rules is an error.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Mapping, NamedTuple, Optional, Tuple

from .tape import BitGenerator, Tape, gen_bit, write

__all__ = [
    "START", "LIMIT", "HALT", "Action", "Program", "Snapshot",
    "AssemblyError", "ProgramError", "MachineError",
    "assemble", "disassemble", "step", "initial_snapshot", "scanned_cases",
]

START, LIMIT, HALT = "start", "limit", "halt"


class AssemblyError(ValueError):
    """Syntax error in assembly text, with 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = f"line {line}" + (f", column {column}" if column else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)


class ProgramError(AssemblyError):
    """Well-formed text describing an invalid program."""


class MachineError(RuntimeError):
    pass


class Action(NamedTuple):
    write: Tuple[int, int, int]
    move: str
    next: str


def _state_key(name: str):
    rank = {START: 0, LIMIT: 1, HALT: 3}.get(name, 2)
    parts = re.split(r"(\d+)", name)
    return (rank, [int(p) if p.isdigit() else p for p in parts])


def scanned_cases(uses_oracle: bool):
    return list(itertools.product((0, 1), repeat=4 if uses_oracle else 3))


class Program:
    """A validated, total transition table."""

    def __init__(self, transitions: Mapping[Tuple[str, tuple], Action], uses_oracle: bool = False):
        table = {}
        for (state, scanned), act in transitions.items():
            table[(state, tuple(scanned))] = Action(tuple(act[0]), act[1], act[2])
        names = {START, LIMIT, HALT}
        names.update(s for s, _ in table)
        names.update(a.next for a in table.values())
        self.states = tuple(sorted(names, key=_state_key))
        self.uses_oracle = bool(uses_oracle)
        self.transitions = table
        self._validate()

    def _validate(self):
        arity = 4 if self.uses_oracle else 3
        for (state, scanned), act in self.transitions.items():
            if state == HALT:
                raise ProgramError("halt may not have transitions")
            if len(scanned) != arity or any(b not in (0, 1) for b in scanned):
                raise ProgramError(f"bad scanned tuple {scanned} for state {state}")
            if len(act.write) != 3 or any(b not in (0, 1) for b in act.write):
                raise ProgramError(f"bad write tuple {act.write} in state {state}")
            if act.move not in ("L", "R"):
                raise ProgramError(f"bad move {act.move!r} in state {state}")
        for state in self.states:
            if state == HALT:
                continue
            for scanned in scanned_cases(self.uses_oracle):
                if (state, scanned) not in self.transitions:
                    raise ProgramError(f"state {state} has no rule for scanned {_fmt_bits(scanned)}")

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return (self.states, self.uses_oracle, self.transitions) == (
            other.states, other.uses_oracle, other.transitions)

    def __hash__(self):
        return hash((self.states, self.uses_oracle, tuple(sorted(self.transitions.items()))))

    def __repr__(self):
        return f"Program(states={self.states!r}, uses_oracle={self.uses_oracle})"


@dataclass(frozen=True)
class Snapshot:
    state: str
    head: int
    input: Tape
    work: Tape
    output: Tape

    @property
    def tapes(self) -> Tuple[Tape, Tape, Tape]:
        return (self.input, self.work, self.output)

    @property
    def halted(self) -> bool:
        return self.state == HALT


def initial_snapshot(input_tape: Tape, work: Tape = None, output: Tape = None) -> Snapshot:
    from .tape import Const
    return Snapshot(START, 0, input_tape, work or Tape(Const(0)), output or Tape(Const(0)))


def step(p: Program, s: Snapshot, oracle: Optional[BitGenerator] = None) -> Snapshot:
    """One successor step.  The result has state ``halt`` when the machine halts."""
    if s.state == HALT:
        raise MachineError("cannot step a halted snapshot")
    if p.uses_oracle != (oracle is not None):
        raise MachineError("oracle must be supplied exactly when the program uses one")
    h = s.head
    scanned = (s.input[h], s.work[h], s.output[h])
    if oracle is not None:
        scanned += (gen_bit(oracle, h),)
    act = p.transitions[(s.state, scanned)]
    i, w, o = act.write
    head = h + 1 if act.move == "R" else max(h - 1, 0)
    return Snapshot(act.next, head, write(s.input, h, i), write(s.work, h, w), write(s.output, h, o))


# -- assembler ------------------------------------------------------------------

_HEADER = re.compile(r"^\s*(?:state\s+)?([A-Za-z_][\w-]*)\s*:\s*(.*)$")
_RULE = re.compile(
    r"^\s*on\s*\(([^)]*)\)\s*:\s*write\s*(?:\(([^)]*)\)|(same))\s*,"
    r"\s*move\s+([LR])\s*,\s*goto\s+([A-Za-z_][\w-]*)\s*$")


def _fmt_bits(bits) -> str:
    return "(" + ",".join("_" if b is None else str(b) for b in bits) + ")"


def _bits(text, lineno, column, what):
    out = []
    for item in text.split(","):
        item = item.strip().replace("\\", "")
        if item == "_":
            out.append(None)
        elif item in ("0", "1"):
            out.append(int(item))
        else:
            raise AssemblyError(f"bad {what} component {item!r}", lineno, column)
    return tuple(out)


def assemble(text: str) -> Program:
    rules: Dict[str, list] = {}
    declared = []
    current = None
    arity = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        body = line
        if not re.match(r"\s*on\s*\(", line):
            m = _HEADER.match(line)
            if not m:
                raise AssemblyError("expected 'state <name>:' or a rule", lineno, 1)
            current = m.group(1)
            if current in rules:
                raise ProgramError(f"state {current} declared twice", lineno)
            if current == HALT:
                raise ProgramError("halt may not have rules", lineno)
            rules[current] = []
            declared.append(current)
            body = m.group(2)
            if not body.strip():
                continue
        m = _RULE.match(body)
        if not m:
            col = len(line) - len(body) + 1
            raise AssemblyError("malformed rule", lineno, col)
        if current is None:
            raise AssemblyError("rule outside of a state block", lineno, 1)
        col = line.find("(") + 1
        pattern = _bits(m.group(1), lineno, col, "scanned")
        if len(pattern) not in (3, 4):
            raise AssemblyError("scanned tuple needs 3 or 4 components", lineno, col)
        if arity is None:
            arity = len(pattern)
        elif arity != len(pattern):
            raise ProgramError("all rules must scan the same number of tapes", lineno, col)
        if m.group(3):
            wr = (None, None, None)
        else:
            wr = _bits(m.group(2), lineno, line.find("write") + 1, "write")
            if len(wr) != 3:
                raise AssemblyError("write tuple needs 3 components", lineno, line.find("write") + 1)
        rules[current].append((pattern, wr, m.group(4), m.group(5), lineno))

    for name in (START, LIMIT):
        if name not in rules:
            first = _fmt_bits(scanned_cases(arity == 4)[0])
            raise ProgramError(f"missing rules for required state {name}: "
                               f"state {name} has no rule for scanned {first}")
    known = set(rules) | {HALT}
    for state, rs in rules.items():
        for pattern, _, _, target, lineno in rs:
            if target not in known:
                raise ProgramError(f"goto unknown state {target}", lineno)
        seen = {}
        for pattern, _, _, _, lineno in rs:
            if pattern in seen:
                raise ProgramError(f"duplicate rule {_fmt_bits(pattern)} in state {state} "
                                   f"(first on line {seen[pattern]})", lineno)
            seen[pattern] = lineno

    uses_oracle = arity == 4
    table = {}
    for state, rs in rules.items():
        for scanned in scanned_cases(uses_oracle):
            matches = [r for r in rs if all(p is None or p == b for p, b in zip(r[0], scanned))]
            if not matches:
                raise ProgramError(f"state {state} has no rule for scanned {_fmt_bits(scanned)}")
            best = min(r[0].count(None) for r in matches)
            winners = [r for r in matches if r[0].count(None) == best]
            if len(winners) > 1:
                lines = ", ".join(str(r[4]) for r in winners)
                raise ProgramError(f"ambiguous rules for state {state} scanned "
                                   f"{_fmt_bits(scanned)} (lines {lines})", winners[1][4])
            pattern, wr, move, target, _ = winners[0]
            written = tuple(scanned[k] if wr[k] is None else wr[k] for k in range(3))
            table[(state, scanned)] = Action(written, move, target)
    return Program(table, uses_oracle)


def disassemble(p: Program) -> str:
    lines = []
    for state in p.states:
        if state == HALT:
            continue
        lines.append(f"state {state}:")
        for scanned in scanned_cases(p.uses_oracle):
            act = p.transitions[(state, scanned)]
            lines.append(f"  on {_fmt_bits(scanned)}: write {_fmt_bits(act.write)}, "
                         f"move {act.move}, goto {act.next}")
    return "\n".join(lines) + "\n"
