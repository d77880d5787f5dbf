import pytest
from hypothesis import given, settings, strategies as st

from ittm.jump import (ArityError, EnumerationError, bound_count, check_approx, enumerate_program, index_of,
                       jump_approx, jump_report, relative_run)
from ittm.machine import Action, Program, assemble
from ittm.ordinal import ONE
from ittm.programs import stdlib_program
from ittm.runner import Halted, RunConfig, run
from ittm.tape import Const, Periodic, Tape

from conftest import periodic_inputs

COPY_ORACLE = """
state start:
  on (_,_,_,0): write (_,_,0), move R, goto q2
  on (_,_,_,1): write (_,_,1), move R, goto q2
state q2:
  on (_,_,_,0): write (_,_,0), move R, goto halt
  on (_,_,_,1): write (_,_,1), move R, goto halt
state limit:
  on (_,_,_,_): write same, move R, goto halt
"""

SMALL = RunConfig(64, 1, 64)
LARGER = RunConfig(256, 2, 256)


def test_round_trips():
    assert enumerate_program(index_of(stdlib_program("halt-now"))) == stdlib_program("halt-now")
    assert index_of(enumerate_program(0)) == 0
    with pytest.raises(EnumerationError):
        enumerate_program(bound_count())
    with pytest.raises(EnumerationError):
        enumerate_program(-1)


@settings(max_examples=60)
@given(st.integers(0, bound_count() - 1))
def test_index_round_trip_property(i):
    assert index_of(enumerate_program(i)) == i


def test_extra_states_are_renamed():
    p = stdlib_program("halt-at-omega-squared")
    renamed = Program({(s.replace("q2", "wait"), sc): Action(a.write, a.move, a.next.replace("q2", "wait"))
                       for (s, sc), a in p.transitions.items()})
    assert index_of(renamed) == index_of(p)
    assert enumerate_program(index_of(renamed)) == p


def test_too_many_states():
    with pytest.raises(EnumerationError):
        index_of(stdlib_program("mark-forever"))


def test_block_order():
    assert not enumerate_program(0).uses_oracle
    assert len(enumerate_program(0).states) == 3
    first_oracle = (16 * 3) ** 16
    assert enumerate_program(first_oracle).uses_oracle
    assert len(enumerate_program(first_oracle - 1).states) == 3


def test_known_programs_are_placed():
    idx = {n: index_of(stdlib_program(n)) for n in ["halt-now", "halt-at-limit", "blinker", "repeat-escape"]}
    a = jump_approx(Tape(Const(0)), list(idx.values()) + [0])
    assert a.halted[idx["halt-now"]] == ONE
    assert idx["blinker"] in a.diverges
    assert idx["halt-at-limit"] in a.halted and idx["repeat-escape"] in a.halted
    assert check_approx(a) == []


@pytest.mark.parametrize("x", periodic_inputs(5)[:4] + [Tape(Const(0))], ids=str)
def test_horizon_monotone(x):
    a = jump_approx(x, 100, SMALL)
    b = jump_approx(x, 100, LARGER)
    assert set(a.halted) <= set(b.halted)
    assert set(a.diverges) <= set(b.diverges)
    assert sorted([*a.halted, *a.diverges, *a.unknown]) == list(range(100))


def test_schedule_independent():
    x = Tape(Periodic((1,), (0, 1)))
    assert jump_approx(x, 60, SMALL) == jump_approx(x, 60, SMALL, workers=2)


def test_report_is_stable():
    a = jump_approx(Tape(Const(0)), 20, SMALL)
    assert jump_report(a) == jump_report(jump_approx(Tape(Const(0)), 20, SMALL))
    assert jump_report(a).splitlines()[1] == "0\thalted\tstage=1"


def test_relative_run_copies_oracle():
    e = index_of(assemble(COPY_ORACLE))
    o = relative_run(e, Tape(Const(0)), Periodic((), (1, 0)))
    assert isinstance(o, Halted)
    assert (o.output[0], o.output[1]) == (1, 0)


def test_relative_run_arity():
    with pytest.raises(ArityError):
        relative_run(index_of(stdlib_program("halt-now")), Tape(Const(0)), Const(1))


def test_oracle_independent_program():
    base = stdlib_program("halt-at-limit")
    widened = Program({(s, sc + (z,)): a for (s, sc), a in base.transitions.items() for z in (0, 1)},
                      uses_oracle=True)
    x = Tape(Periodic((), (1, 0, 0)))
    assert relative_run(index_of(widened), x, Const(0)) == run(base, x)[0]
