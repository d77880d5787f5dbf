import json

import pytest

from ittm.machine import LIMIT, assemble, initial_snapshot, step
from ittm.ordinal import OMEGA, ONE, Ordinal, add, omega_power, parse
from ittm.programs import stdlib_program
from ittm.runner import (Diverges, Halted, HorizonExceeded, RunCancelled, RunConfig, Trace, check_witness,
                         classify_eventual, dumps_trace, flatten, history_lines, replay_check, run,
                         take_limit, trace_from_dict, trace_to_dict)
from ittm.tape import Const, Periodic, Tape

from conftest import STDLIB, periodic_inputs


def outcome(name, x=None, cfg=RunConfig()):
    return run(stdlib_program(name), x or Tape(Const(0)), None, cfg)


def test_halt_now():
    o, trace = outcome("halt-now")
    assert o == Halted(Tape(Const(0), {0: 1}), ONE)
    assert [r.kind for r in trace.rows] == ["step", "halt"]


def test_halt_at_limit():
    o, _ = outcome("halt-at-limit")
    assert isinstance(o, Halted) and o.stage == parse("w+1")


def test_halt_at_omega_squared():
    o, trace = outcome("halt-at-omega-squared")
    assert isinstance(o, Halted) and o.stage == parse("w^2+1")
    assert [lt.stage for lt in trace.limits][:2] == [OMEGA, parse("w*2")]
    assert trace.limits[-1].level == 2


def test_repeat_escape_repeats_then_escapes():
    o, trace = outcome("repeat-escape")
    repeat = next(r for r in trace.rows if r.kind == "repeat")
    assert repeat.level == 1 and repeat.stage == Ordinal.from_int(2)
    first = trace.rows[0].snapshot
    assert repeat.snapshot == first
    limit = trace.limits[0].result
    assert limit != first and limit.work[0] == 1
    assert isinstance(o, Halted) and o.stage == parse("w+1")


def test_mark_forever_stabilizes():
    o, _ = outcome("mark-forever")
    assert isinstance(o, Diverges)
    assert check_witness(o.witness)
    assert o.stabilized_output == Tape(Const(0))
    assert classify_eventual(o) == ("stabilizes", Tape(Const(0)))


def test_blinker_oscillates():
    o, trace = outcome("blinker")
    assert isinstance(o, Diverges) and o.stabilized_output is None
    assert check_witness(o.witness)
    assert o.witness.level == 1
    assert classify_eventual(o) == ("oscillates", None)
    assert history_lines(trace)[-1] == "LOOP\tlevel=1\tstage=w*2"


def test_witness_check_rejects_tampered_block():
    o, _ = outcome("blinker")
    w = o.witness
    entry = w.entry
    moved = type(entry)(entry.state, entry.head, entry.input, entry.work, Tape(Const(0), {9: 1}))
    assert not check_witness(type(w)(w.level, moved, w.block))


@pytest.mark.parametrize("name", STDLIB)
def test_replay_reproduces_every_row(name):
    for x in periodic_inputs(5):
        o, trace = outcome(name, x)
        assert replay_check(stdlib_program(name), trace) == []
        if isinstance(o, Diverges):
            assert check_witness(o.witness)


def test_replay_detects_tampering():
    _, trace = outcome("halt-at-limit")
    rows = list(trace.rows)
    rows[2] = type(rows[2])(rows[2].stage, rows[1].snapshot.__class__(
        "start", 5, *rows[2].snapshot.tapes), rows[2].kind)
    bad = Trace(trace.input, None, rows, trace.limits, trace.outcome)
    assert replay_check(stdlib_program("halt-at-limit"), bad)


def test_level1_limit_equals_brute_force_over_three_periods():
    p = stdlib_program("blinker")
    s = initial_snapshot(Tape(Const(0)))
    snaps = [s]
    for _ in range(5):
        s = step(p, s)
        snaps.append(s)
    assert take_limit(snaps[:2]) == take_limit(snaps)
    assert take_limit(snaps).state == LIMIT


def test_tower_bound_gives_horizon():
    o, trace = outcome("halt-at-omega-squared", cfg=RunConfig(max_tower=1))
    assert isinstance(o, HorizonExceeded)
    assert history_lines(trace)[-1].startswith("HORIZON")


def test_step_budget_gives_horizon():
    p = assemble("""
state start:
  on (_,_,_): write (_,1,_), move R, goto start
state limit:
  on (_,_,_): write same, move R, goto halt
""")
    o, _ = run(p, Tape(Const(0)), None, RunConfig(max_steps_per_block=100))
    assert o == HorizonExceeded(Ordinal.from_int(100))


def test_history_eviction_hides_long_cycles():
    o, _ = outcome("blinker", cfg=RunConfig(max_history=1))
    assert isinstance(o, HorizonExceeded)


def test_larger_horizon_only_resolves():
    small = RunConfig(64, 1, 64)
    for name in STDLIB:
        a, _ = outcome(name, cfg=small)
        b, _ = outcome(name)
        if not isinstance(a, HorizonExceeded):
            assert a == b


def test_cancel():
    with pytest.raises(RunCancelled):
        run(stdlib_program("blinker"), Tape(Const(0)), None, RunConfig(), cancel=lambda: True)


def test_oracle_must_match_program():
    with pytest.raises(ValueError):
        run(stdlib_program("halt-now"), Tape(Const(0)), Const(1))


def test_trace_serialization_round_trip():
    for name in STDLIB:
        _, trace = outcome(name, Tape(Periodic((1,), (0, 1))))
        back = trace_from_dict(json.loads(dumps_trace(trace)))
        assert history_lines(back) == history_lines(trace)
        assert back.outcome.__class__ is trace.outcome.__class__


def test_runs_are_deterministic():
    for name in STDLIB:
        a = dumps_trace(outcome(name)[1])
        b = dumps_trace(outcome(name)[1])
        assert a == b


def test_flatten_order():
    o, _ = outcome("mark-forever")
    snaps = list(flatten(o.witness.block))
    assert snaps[0] == o.witness.entry
    assert take_limit(snaps) == o.witness.entry
