"""A simulator for infinite time Turing machines on finitely described tapes."""
from .machine import Program, Snapshot, assemble, disassemble, step
from .ordinal import OMEGA, ONE, ZERO, Ordinal
from .runner import Diverges, Halted, HorizonExceeded, RunConfig, run
from .tape import Const, OrderCode, Periodic, Tape, parse_tape

__all__ = [
    "Program", "Snapshot", "assemble", "disassemble", "step",
    "Ordinal", "ZERO", "ONE", "OMEGA",
    "RunConfig", "run", "Halted", "Diverges", "HorizonExceeded",
    "Tape", "Const", "Periodic", "OrderCode", "parse_tape",
]
