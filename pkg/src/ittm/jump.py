"""Canonical program enumeration and a three-valued approximation of the jump.

Programs are listed in blocks.  A block fixes the number ``n`` of
non-halting states (start, limit, q2, ...) and whether the oracle bit is
scanned; blocks run over n = 2 .. max_states-1, without oracle first.
Inside a block a program is a mixed-radix number.  The cases are the
(state, scanned) pairs in state order and lexicographic scanned order; case
0 is the least significant digit.  Each digit encodes one action as
``(next * 2 + move) * 8 + write``, where ``next`` counts halt, start,
limit, q2, ... from 0, ``move`` is 0 for L and 1 for R, and ``write`` is the
bit-triple read as a binary number.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple, Union

from .machine import HALT, LIMIT, START, Action, Program, scanned_cases
from .ordinal import Ordinal, format_ordinal
from .runner import Diverges, Halted, LimitRecord, RunConfig, RunOutcome, check_witness, run
from .tape import BitGenerator, Tape, format_tape

__all__ = [
    "DEFAULT_MAX_STATES", "EnumerationError", "ArityError", "state_names", "bound_count",
    "enumerate_program", "index_of", "JumpApprox", "jump_approx", "relative_run", "check_approx",
    "jump_report",
]

DEFAULT_MAX_STATES = 4  # halt included


class EnumerationError(ValueError):
    pass


class ArityError(ValueError):
    pass


def state_names(n: int) -> List[str]:
    """The ``n`` non-halting state names of a block, in canonical order."""
    return [START, LIMIT] + [f"q{k}" for k in range(2, n)]


def _block_size(n: int, oracle: bool) -> int:
    return (16 * (n + 1)) ** (n * (16 if oracle else 8))


def _blocks(max_states: int):
    for n in range(2, max_states):
        for oracle in (False, True):
            yield n, oracle


def bound_count(max_states: int = DEFAULT_MAX_STATES) -> int:
    return sum(_block_size(n, o) for n, o in _blocks(max_states))


def enumerate_program(i: int, max_states: int = DEFAULT_MAX_STATES) -> Program:
    if i < 0:
        raise EnumerationError(f"negative index {i}")
    for n, oracle in _blocks(max_states):
        size = _block_size(n, oracle)
        if i < size:
            break
        i -= size
    else:
        raise EnumerationError("index beyond the enumeration bound")
    names = state_names(n)
    targets = [HALT] + names
    table = {}
    for state in names:
        for scanned in scanned_cases(oracle):
            i, digit = divmod(i, 16 * (n + 1))
            rest, write = divmod(digit, 8)
            nxt, move = divmod(rest, 2)
            bits = ((write >> 2) & 1, (write >> 1) & 1, write & 1)
            table[(state, scanned)] = Action(bits, "LR"[move], targets[nxt])
    return Program(table, oracle)


def _canonical_names(p: Program) -> Dict[str, str]:
    extra = [s for s in p.states if s not in (START, LIMIT, HALT)]
    mapping = {START: START, LIMIT: LIMIT, HALT: HALT}
    mapping.update({s: f"q{k}" for k, s in enumerate(extra, 2)})
    return mapping


def index_of(p: Program, max_states: int = DEFAULT_MAX_STATES) -> int:
    """Index of ``p`` after renaming its extra states to q2, q3, ... in order."""
    n = len(p.states) - 1
    if n >= max_states:
        raise EnumerationError(f"program has {n + 1} states; the bound is {max_states}")
    rename = _canonical_names(p)
    targets = [HALT] + state_names(n)
    offset = 0
    for m, oracle in _blocks(max_states):
        if (m, oracle) == (n, p.uses_oracle):
            break
        offset += _block_size(m, oracle)
    index, scale = 0, 1
    radix = 16 * (n + 1)
    for state in sorted(p.states[:-1], key=lambda s: state_names(n).index(rename[s])):
        for scanned in scanned_cases(p.uses_oracle):
            act = p.transitions[(state, scanned)]
            write = act.write[0] * 4 + act.write[1] * 2 + act.write[2]
            digit = (targets.index(rename[act.next]) * 2 + "LR".index(act.move)) * 8 + write
            index += digit * scale
            scale *= radix
    return offset + index


@dataclass(frozen=True)
class JumpApprox:
    input: Tape
    horizon: RunConfig
    halted: Dict[int, Ordinal] = field(default_factory=dict)
    diverges: Dict[int, LimitRecord] = field(default_factory=dict)
    unknown: Tuple[int, ...] = ()

    def indices(self) -> List[int]:
        return sorted([*self.halted, *self.diverges, *self.unknown])


def _run_index(args) -> Tuple[int, RunOutcome]:
    i, x, cfg, max_states = args
    p = enumerate_program(i, max_states)
    oracle = x.base if p.uses_oracle else None  # oracle programs see their input as parameter
    outcome, _ = run(p, x, oracle, cfg, keep_rows=False)
    return i, outcome


def jump_approx(x: Tape, indices: Union[int, Iterable[int]], cfg: RunConfig = RunConfig(),
                workers: int = 0, max_states: int = DEFAULT_MAX_STATES) -> JumpApprox:
    """Run every listed program on ``x`` and sort the indices by verdict.

    An int means ``range(indices)``.  With ``workers > 1`` the runs are spread
    over processes; the result does not depend on the schedule.
    """
    if isinstance(indices, int):
        indices = range(indices)
    jobs = [(i, x, cfg, max_states) for i in sorted(set(indices))]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_index, jobs, chunksize=8))
    else:
        results = [_run_index(j) for j in jobs]
    halted, diverges, unknown = {}, {}, []
    for i, outcome in results:
        if isinstance(outcome, Halted):
            halted[i] = outcome.stage
        elif isinstance(outcome, Diverges):
            diverges[i] = outcome.witness
        else:
            unknown.append(i)
    return JumpApprox(x, cfg, halted, diverges, tuple(unknown))


def relative_run(e: int, x: Tape, z: BitGenerator, cfg: RunConfig = RunConfig(),
                 max_states: int = DEFAULT_MAX_STATES) -> RunOutcome:
    p = enumerate_program(e, max_states)
    if not p.uses_oracle:
        raise ArityError(f"program {e} does not scan an oracle")
    return run(p, x, z, cfg)[0]


def check_approx(a: JumpApprox, max_states: int = DEFAULT_MAX_STATES) -> List[str]:
    """Replay halting verdicts and re-check divergence witnesses."""
    problems = []
    for i, stage in a.halted.items():
        p = enumerate_program(i, max_states)
        outcome, _ = run(p, a.input, a.input.base if p.uses_oracle else None, a.horizon)
        if not (isinstance(outcome, Halted) and outcome.stage == stage):
            problems.append(f"{i}: halting stage {format_ordinal(stage)} not reproduced")
    for i, w in a.diverges.items():
        if not check_witness(w):
            problems.append(f"{i}: witness does not regenerate its entry")
    if set(a.halted) & set(a.diverges) or set(a.unknown) & (set(a.halted) | set(a.diverges)):
        problems.append("verdict sets overlap")
    return problems


def jump_report(a: JumpApprox, structured: bool = False):
    if structured:
        return {
            "input": format_tape(a.input),
            "horizon": {"max_steps": a.horizon.max_steps_per_block, "tower": a.horizon.max_tower,
                        "max_history": a.horizon.max_history},
            "halted": {str(i): format_ordinal(s) for i, s in sorted(a.halted.items())},
            "diverges": {str(i): w.level for i, w in sorted(a.diverges.items())},
            "unknown": list(a.unknown),
        }
    lines = [f"input\t{format_tape(a.input)}"]
    for i in a.indices():
        if i in a.halted:
            lines.append(f"{i}\thalted\tstage={format_ordinal(a.halted[i])}")
        elif i in a.diverges:
            lines.append(f"{i}\tdiverges\tlevel={a.diverges[i].level}")
        else:
            lines.append(f"{i}\tunknown")
    lines.append(f"total\thalted={len(a.halted)}\tdiverges={len(a.diverges)}\tunknown={len(a.unknown)}")
    return "\n".join(lines)
