"""Transfinite execution with hierarchical lasso detection.

The run from stage 0 is organised into segments.  A level-0 segment is a
single step.  A level-k segment, entered at a multiple of omega**k, is the
sequence of level-(k-1) segments started from successive snapshots; once a
snapshot at the start of one of them recurs, the machine provably repeats
that stretch forever, so the next omega**k limit is reached exactly and its
tapes are the cellwise maximum over everything seen inside the repeating
stretch.

Divergence is reported only when such a repeating stretch regenerates its
own first snapshot as its limit (a strong loop).  A plain repetition of
configurations never counts: the limit may differ and the machine escapes.
"""
from __future__ import annotations

import json
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

from .machine import HALT, LIMIT, Program, Snapshot, initial_snapshot, step
from .ordinal import ONE, ZERO, Ordinal, add, format_ordinal, is_limit, omega_power, parse
from .tape import BitGenerator, Tape, block_limsup, format_generator, format_tape, parse_tape

__all__ = [
    "RunConfig", "LimitRecord", "Halted", "Diverges", "HorizonExceeded", "RunOutcome",
    "TraceRow", "LimitTaken", "Trace", "RunCancelled",
    "take_limit", "flatten", "check_witness", "run", "classify_eventual",
    "export_history", "history_lines", "trace_to_dict", "trace_from_dict", "replay_check",
    "outcome_to_dict", "dumps_trace",
]


@dataclass(frozen=True)
class RunConfig:
    max_steps_per_block: int = 4096
    max_tower: int = 4
    max_history: int = 512

    def __post_init__(self):
        for name in ("max_steps_per_block", "max_tower", "max_history"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass(frozen=True)
class LimitRecord:
    """A stretch of computation: ``block`` holds snapshots (level 1) or
    lower-level records, in order, starting from ``entry``."""

    level: int
    entry: Snapshot
    block: Tuple[Union[Snapshot, "LimitRecord"], ...]


@dataclass(frozen=True)
class Halted:
    output: Tape
    stage: Ordinal


@dataclass(frozen=True)
class Diverges:
    witness: LimitRecord
    stabilized_output: Optional[Tape] = None


@dataclass(frozen=True)
class HorizonExceeded:
    stage_reached: Ordinal


RunOutcome = Union[Halted, Diverges, HorizonExceeded]


class RunCancelled(Exception):
    pass


@dataclass(frozen=True)
class TraceRow:
    stage: Ordinal
    snapshot: Optional[Snapshot]
    kind: str  # step | limit | repeat | halt | loop | horizon
    level: int = 0


@dataclass(frozen=True)
class LimitTaken:
    level: int
    stage: Ordinal
    period: Tuple[Union[Snapshot, LimitRecord], ...]
    result: Snapshot


@dataclass
class Trace:
    input: Tape
    oracle: Optional[BitGenerator] = None
    rows: List[TraceRow] = field(default_factory=list)
    limits: List[LimitTaken] = field(default_factory=list)
    outcome: Optional[RunOutcome] = None


def flatten(block) -> Iterator[Snapshot]:
    for item in block:
        if isinstance(item, LimitRecord):
            yield from flatten(item.block)
        else:
            yield item


def take_limit(block: Sequence[Snapshot]) -> Snapshot:
    block = list(block)
    if not block:
        raise ValueError("take_limit needs a nonempty block")
    tapes = [block_limsup([s.tapes[k] for s in block]) for k in range(3)]
    return Snapshot(LIMIT, 0, *tapes)


def check_witness(witness: LimitRecord) -> bool:
    """Independent strong-loop check: the block's limit is its own entry."""
    snaps = list(flatten(witness.block))
    return bool(snaps) and snaps[0] == witness.entry and take_limit(snaps) == witness.entry


# -- engine ----------------------------------------------------------------------

class _Stop(Exception):
    def __init__(self, outcome):
        self.outcome = outcome


def _max_tapes(summaries):
    return tuple(block_limsup([s[k] for s in summaries]) for k in range(3))


class _Engine:
    def __init__(self, program, oracle, cfg, trace, cancel, keep_rows=True):
        self.p, self.oracle, self.cfg, self.trace, self.cancel = program, oracle, cfg, trace, cancel
        self.keep_rows = keep_rows

    def _row(self, row):
        if self.keep_rows or row.kind in ("halt", "loop", "horizon"):
            self.trace.rows.append(row)

    def segment(self, level: int, entry: Snapshot, stage: Ordinal):
        """Run one level-``level`` segment; return (next snapshot, summary tapes, record)."""
        if level == 0:
            if self.cancel is not None and self.cancel():
                raise RunCancelled(format_ordinal(stage))
            kind = "limit" if is_limit(stage) else "step"
            self._row(TraceRow(stage, entry, kind))
            nxt = step(self.p, entry, self.oracle)
            if nxt.state == HALT:
                halt_stage = add(stage, ONE)
                self._row(TraceRow(halt_stage, nxt, "halt"))
                raise _Stop(Halted(nxt.output, halt_stage))
            return nxt, entry.tapes, entry

        width = omega_power(level - 1)
        seen: "OrderedDict[Snapshot, int]" = OrderedDict()
        items = []  # (snapshot, summary, record)
        cur, st = entry, stage
        while cur not in seen:
            if len(items) >= self.cfg.max_steps_per_block:
                self._row(TraceRow(st, None, "horizon", level))
                raise _Stop(HorizonExceeded(st))
            seen[cur] = len(items)
            if len(seen) > self.cfg.max_history:
                seen.popitem(last=False)
            nxt, summary, record = self.segment(level - 1, cur, st)
            items.append((cur, summary, record))
            cur, st = nxt, add(st, width)

        self._row(TraceRow(st, cur, "repeat", level))
        j = seen[cur]
        period = tuple(r for _, _, r in items[j:])
        limit = Snapshot(LIMIT, 0, *_max_tapes([s for _, s, _ in items[j:]]))
        if limit == items[j][0]:
            witness = LimitRecord(max(level - 1, 1), limit, period)
            self._row(TraceRow(st, None, "loop", witness.level))
            outputs = {s.output for s in flatten(period)}
            stable = outputs.pop() if len(outputs) == 1 else None
            raise _Stop(Diverges(witness, stable))
        if level > self.cfg.max_tower:
            self._row(TraceRow(st, None, "horizon", level))
            raise _Stop(HorizonExceeded(st))
        limit_stage = add(stage, omega_power(level))
        self.trace.limits.append(LimitTaken(level, limit_stage, period, limit))
        record = LimitRecord(level, entry, tuple(r for _, _, r in items))
        return limit, _max_tapes([s for _, s, _ in items]), record


def run(p: Program, input_tape: Tape, oracle: Optional[BitGenerator] = None,
        cfg: RunConfig = RunConfig(), cancel: Callable[[], bool] = None,
        keep_rows: bool = True) -> Tuple[RunOutcome, Trace]:
    """Execute ``p`` on ``input_tape`` until halt, a strong loop, or the horizon.

    Stages reachable are below omega**(cfg.max_tower + 1).  ``cancel`` is
    polled before every step and raises :class:`RunCancelled` when true.
    With ``keep_rows`` false only the terminal rows and the limits are kept.
    """
    if p.uses_oracle != (oracle is not None):
        raise ValueError("oracle must be given exactly when the program uses one")
    trace = Trace(input_tape, oracle)
    engine = _Engine(p, oracle, cfg, trace, cancel, keep_rows)
    try:
        engine.segment(cfg.max_tower + 1, initial_snapshot(input_tape), ZERO)
    except _Stop as stop:
        trace.outcome = stop.outcome
    else:  # pragma: no cover - the top level segment never returns
        raise AssertionError("top-level segment returned")
    return trace.outcome, trace


def classify_eventual(outcome: RunOutcome):
    """``("halts", None)``, ``("stabilizes", tape)``, ``("oscillates", None)`` or ``("unknown", None)``."""
    if isinstance(outcome, Halted):
        return ("halts", None)
    if isinstance(outcome, Diverges):
        if outcome.stabilized_output is not None:
            return ("stabilizes", outcome.stabilized_output)
        return ("oscillates", None)
    return ("unknown", None)


# -- checking and export -----------------------------------------------------------

def replay_check(p: Program, trace: Trace) -> List[str]:
    """Re-derive every recorded row from its predecessor; return discrepancies."""
    problems = []
    limits = {lt.stage: lt for lt in trace.limits}
    prev = None
    for row in trace.rows:
        if row.snapshot is None:
            continue
        if row.kind in ("step", "halt") or (row.kind == "repeat" and row.level == 1):
            if prev is None:
                if row.stage != ZERO or row.snapshot != initial_snapshot(trace.input):
                    problems.append(f"bad initial row at {row.stage}")
            elif prev.stage == row.stage or add(prev.stage, ONE) != row.stage:
                problems.append(f"row at {row.stage} does not follow {prev.stage}")
            elif step(p, prev.snapshot, trace.oracle) != row.snapshot:
                problems.append(f"step into {row.stage} not reproduced")
        elif row.kind == "limit":
            lt = limits.get(row.stage)
            if lt is None:
                problems.append(f"no limit record for {row.stage}")
            elif lt.result != row.snapshot or take_limit(flatten(lt.period)) != row.snapshot:
                problems.append(f"limit at {row.stage} not reproduced")
        if row.kind in ("step", "limit"):
            prev = row
    return problems


def _snapshot_fields(s: Snapshot):
    return [s.state, str(s.head)] + [format_tape(t) for t in s.tapes]


def history_lines(trace: Trace) -> List[str]:
    """One tab-separated line per recorded stage; a settled history ends with
    a ``halt`` row or a ``LOOP`` line, an unsettled one with ``HORIZON``."""
    lines = []
    for row in trace.rows:
        if row.kind == "loop":
            lines.append(f"LOOP\tlevel={row.level}\tstage={format_ordinal(row.stage)}")
        elif row.kind == "horizon":
            lines.append(f"HORIZON\tlevel={row.level}\tstage={format_ordinal(row.stage)}")
        else:
            kind = row.kind if row.kind != "repeat" else f"repeat:{row.level}"
            lines.append("\t".join([format_ordinal(row.stage)] + _snapshot_fields(row.snapshot) + [kind]))
    return lines


def export_history(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(history_lines(trace)) + "\n")


def outcome_to_dict(o: RunOutcome):
    if isinstance(o, Halted):
        return {"kind": "halted", "stage": format_ordinal(o.stage), "output": format_tape(o.output)}
    if isinstance(o, Diverges):
        return {"kind": "diverges", "level": o.witness.level,
                "entry": _snapshot_fields(o.witness.entry),
                "stabilized_output": None if o.stabilized_output is None else format_tape(o.stabilized_output)}
    return {"kind": "horizon", "stage": format_ordinal(o.stage_reached)}


def trace_to_dict(trace: Trace) -> dict:
    return {
        "input": format_tape(trace.input),
        "oracle": None if trace.oracle is None else format_generator(trace.oracle),
        "rows": [
            {"stage": format_ordinal(r.stage), "kind": r.kind, "level": r.level,
             "snapshot": None if r.snapshot is None else _snapshot_fields(r.snapshot)}
            for r in trace.rows
        ],
        "outcome": outcome_to_dict(trace.outcome),
    }


def _snapshot_from(fields) -> Snapshot:
    state, head, i, w, o = fields
    return Snapshot(state, int(head), parse_tape(i), parse_tape(w), parse_tape(o))


def trace_from_dict(d: dict) -> Trace:
    """Rebuild the rows and input of a structured trace (limit periods are not stored)."""
    from .tape import parse_generator
    trace = Trace(parse_tape(d["input"]), None if d["oracle"] is None else parse_generator(d["oracle"]))
    for r in d["rows"]:
        snap = None if r["snapshot"] is None else _snapshot_from(r["snapshot"])
        trace.rows.append(TraceRow(parse(r["stage"]), snap, r["kind"], r["level"]))
    o = d["outcome"]
    if o["kind"] == "halted":
        trace.outcome = Halted(parse_tape(o["output"]), parse(o["stage"]))
    elif o["kind"] == "diverges":
        entry = _snapshot_from(o["entry"])
        stable = None if o["stabilized_output"] is None else parse_tape(o["stabilized_output"])
        trace.outcome = Diverges(LimitRecord(o["level"], entry, ()), stable)
    else:
        trace.outcome = HorizonExceeded(parse(o["stage"]))
    return trace


def dumps_trace(trace: Trace) -> str:
    return json.dumps(trace_to_dict(trace), indent=1, sort_keys=True)
