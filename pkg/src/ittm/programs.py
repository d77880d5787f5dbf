"""Standard program library and native ground truth for coded orders."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List

from .machine import Program, assemble
from .ordinal import ONE, ZERO, Ordinal, add, cmp, omega_power, OMEGA
from .runner import Diverges, Halted, HorizonExceeded, RunConfig, RunOutcome, run
from .tape import Const, Fin, Omega, OmegaStar, OrderCode, OrderSpec, Prod, Sum, Tape

__all__ = [
    "StdlibEntry", "STDLIB_SOURCES", "stdlib", "stdlib_program", "UnknownProgram",
    "well_founded", "order_type", "IllFounded", "CountThroughVerdict", "count_through_contract",
    "HALT_AT_OMEGA_SQUARED_OFFSET",
]


class UnknownProgram(KeyError):
    pass


class IllFounded(ValueError):
    pass


STDLIB_SOURCES: Dict[str, str] = {
    "halt-now": """
state start:
  on (_,_,_): write (_,_,1), move R, goto halt
state limit:
  on (_,_,_): write same, move R, goto halt
""",
    "halt-at-limit": """
state start:
  on (_,_,_): write same, move L, goto start
state limit:
  on (_,_,_): write same, move L, goto halt
""",
    # Work cell 0 is raised at every limit and dropped one step later, so it
    # is cofinally 1 only at a limit of limits.
    "halt-at-omega-squared": """
state start:
  on (_,_,_): write same, move L, goto start
state limit:
  on (_,0,_): write (_,1,_), move L, goto q2
  on (_,1,_): write same, move L, goto halt
state q2:
  on (_,_,_): write (_,0,_), move L, goto start
""",
    # Marks work cells 0..3 over and over; the marked region stays bounded.
    "mark-forever": """
state start:
  on (_,_,_): write (_,1,_), move R, goto q2
state q2:
  on (_,_,_): write (_,1,_), move R, goto q3
state q3:
  on (_,_,_): write (_,1,_), move R, goto q4
state q4:
  on (_,_,_): write (_,1,_), move L, goto q5
state q5:
  on (_,_,_): write same, move L, goto q6
state q6:
  on (_,_,_): write same, move L, goto start
state limit:
  on (_,_,_): write (_,1,_), move R, goto q2
""",
    # Flips work cell 0 and output cell 0 together, at successors and limits.
    "blinker": """
state start:
  on (_,0,0): write (_,1,1), move L, goto start
  on (_,1,1): write (_,0,0), move L, goto start
  on (_,0,1): write (_,1,0), move L, goto start
  on (_,1,0): write (_,0,1), move L, goto start
state limit:
  on (_,0,0): write (_,1,1), move L, goto start
  on (_,1,1): write (_,0,0), move L, goto start
  on (_,0,1): write (_,1,0), move L, goto start
  on (_,1,0): write (_,0,1), move L, goto start
""",
    # Stage 2 repeats stage 0 exactly, yet the limit sees work cell 0 = 1.
    "repeat-escape": """
state start:
  on (_,0,_): write (_,1,_), move L, goto start
  on (_,1,_): write (_,0,_), move L, goto start
state limit:
  on (_,1,_): write same, move L, goto halt
  on (_,0,_): write same, move L, goto start
""",
    "copy-input": """
state start:
  on (0,_,_): write (_,_,0), move R, goto q2
  on (1,_,_): write (_,_,1), move R, goto q2
state q2:
  on (0,_,_): write (_,_,0), move R, goto q3
  on (1,_,_): write (_,_,1), move R, goto q3
state q3:
  on (0,_,_): write (_,_,0), move R, goto q4
  on (1,_,_): write (_,_,1), move R, goto q4
state q4:
  on (0,_,_): write (_,_,0), move R, goto halt
  on (1,_,_): write (_,_,1), move R, goto halt
state limit:
  on (_,_,_): write same, move R, goto halt
""",
}

HALT_AT_OMEGA_SQUARED_OFFSET = 1


@dataclass(frozen=True)
class StdlibEntry:
    name: str
    program: Program
    behavior: str
    check: Callable[[Tape, RunOutcome], bool]


def _halted_at(stage: Ordinal):
    return lambda x, o: isinstance(o, Halted) and o.stage == stage


def _copy_ok(x: Tape, o: RunOutcome) -> bool:
    return isinstance(o, Halted) and o.stage == 4 and all(o.output[n] == x[n] for n in range(4))


def _strong_loop(stable):
    def check(x, o):
        if not isinstance(o, Diverges):
            return False
        if stable is None:
            return o.stabilized_output is None
        return o.stabilized_output == stable
    return check


def _never_halts(x, o):
    return not isinstance(o, Halted)


_W_PLUS_1 = add(OMEGA, ONE)
_W2_PLUS_C = add(omega_power(2), Ordinal.from_int(HALT_AT_OMEGA_SQUARED_OFFSET))

_BEHAVIOR = {
    "halt-now": ("halts at stage 1 on every input", _halted_at(ONE)),
    "halt-at-limit": ("halts at stage w+1 on every input", _halted_at(_W_PLUS_1)),
    "halt-at-omega-squared": ("halts at stage w^2+1 on every input", _halted_at(_W2_PLUS_C)),
    "mark-forever": ("strong loop; output stabilizes to const(0)", _strong_loop(Tape(Const(0)))),
    "blinker": ("strong loop; output oscillates", _strong_loop(None)),
    "repeat-escape": ("repeats a configuration, escapes at w, halts at w+1", _halted_at(_W_PLUS_1)),
    "copy-input": ("halts at stage 4 with input cells 0..3 on the output", _copy_ok),
    "count-through-semi": ("never halts on ill-founded order codes", _never_halts),
}


@lru_cache(maxsize=None)
def stdlib_program(name: str) -> Program:
    if name == "count-through-semi":
        from .counting import count_through_program
        return count_through_program()
    try:
        return assemble(STDLIB_SOURCES[name])
    except KeyError:
        raise UnknownProgram(name) from None


def stdlib() -> List[StdlibEntry]:
    return [StdlibEntry(name, stdlib_program(name), *_BEHAVIOR[name]) for name in _BEHAVIOR]


# -- native oracles for coded orders --------------------------------------------

def well_founded(s: OrderSpec) -> bool:
    if isinstance(s, (Fin, Omega)):
        return True
    if isinstance(s, OmegaStar):
        return False
    if isinstance(s, Sum):
        return well_founded(s.left) and well_founded(s.right)
    if isinstance(s, Prod):
        return well_founded(s.inner) and well_founded(s.outer)
    raise TypeError(s)


def _mul(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal product ``a * b`` on Cantor normal forms."""
    if not a.terms or not b.terms:
        return ZERO
    lead, lead_coeff = a.terms[0]
    result = ZERO
    for e, c in b.terms:
        if e.terms:
            term = Ordinal(((add(lead, e), c),))
        else:
            term = Ordinal(((lead, lead_coeff * c),) + a.terms[1:])
        result = add(result, term)
    return result


def order_type(s: OrderSpec) -> Ordinal:
    """Order type of the coded relation, surplus elements included."""
    if not well_founded(s):
        raise IllFounded(s)
    if isinstance(s, (Fin, Omega)):
        return OMEGA
    if isinstance(s, Sum):
        return add(order_type(s.left), order_type(s.right))
    if isinstance(s, Prod):
        return _mul(order_type(s.inner), order_type(s.outer))
    raise TypeError(s)


@dataclass(frozen=True)
class CountThroughVerdict:
    spec: OrderSpec
    outcome: RunOutcome
    oracle: bool

    @property
    def agrees(self) -> bool:
        """Whether the machine's answer matches the oracle where it answered."""
        if isinstance(self.outcome, Halted):
            return self.oracle
        if isinstance(self.outcome, Diverges):
            return not self.oracle
        return False

    @property
    def sound(self) -> bool:
        return not (isinstance(self.outcome, Halted) and not self.oracle)

    @property
    def label(self) -> str:
        if isinstance(self.outcome, HorizonExceeded):
            return "UNRESOLVED"
        return "AGREE" if self.agrees else "DISAGREE"


def count_through_contract(s: OrderSpec, cfg: RunConfig = RunConfig()) -> CountThroughVerdict:
    outcome, _ = run(stdlib_program("count-through-semi"), Tape(OrderCode(s)), None, cfg)
    return CountThroughVerdict(s, outcome, well_founded(s))
