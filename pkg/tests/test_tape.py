import pytest
from hypothesis import given, strategies as st

from ittm.tape import (BaseMismatch, Const, ExpressionError, Fin, Omega, OmegaStar, OrderCode, Periodic,
                       Prod, Sum, Tape, block_limsup, format_generator, format_spec, format_tape, gen_bit,
                       pair, parse_generator, parse_spec, parse_tape, precedes, tapes_equal, unpair, write)


def test_pairing_is_cantor():
    assert [pair(0, 0), pair(1, 0), pair(0, 1), pair(2, 0), pair(1, 1)] == [0, 1, 2, 3, 4]
    for n in range(500):
        assert pair(*unpair(n)) == n


def test_periodic_is_canonical():
    assert Periodic((1,), (0, 1)) == Periodic((), (1, 0))
    assert Periodic((), (1, 1, 1)) == Periodic((), (1,))
    assert Periodic((0, 1, 0, 1), (0, 1)) == Periodic((), (0, 1))


def test_periodic_bits():
    g = Periodic((1, 1), (0, 1, 0))
    assert [gen_bit(g, n) for n in range(8)] == [1, 1, 0, 1, 0, 0, 1, 0]


def test_order_code_omega():
    g = OrderCode(Omega())
    assert gen_bit(g, pair(0, 1)) == 1
    assert gen_bit(g, pair(1, 0)) == 0
    assert gen_bit(g, pair(3, 3)) == 0


def test_sum_and_prod_coding():
    s = Sum(Omega(), OmegaStar())
    assert precedes(s, 4, 1)  # every left element precedes every right one
    assert precedes(s, 5, 3)  # the right part is reversed
    p = Prod(Omega(), Omega())
    assert precedes(p, pair(5, 0), pair(0, 1))


def test_fin_codes_natural_order():
    for i in range(10):
        for j in range(10):
            assert precedes(Fin(3), i, j) == (i < j)


def test_write_normalizes_overrides():
    t = Tape(Const(0))
    t1 = write(t, 5, 1)
    assert t1.overrides == ((5, 1),)
    assert write(t1, 5, 0) == t
    assert hash(write(t1, 5, 0)) == hash(t)
    assert Tape(Const(1), {3: 1}) == Tape(Const(1))


def test_tapes_equal_needs_one_base():
    with pytest.raises(BaseMismatch):
        tapes_equal(Tape(Const(0)), Tape(Const(1)))


@pytest.mark.parametrize("text", [
    "const(0){}", "const(1){3:0}", "periodic(;10){}", "periodic(;10){2:0}",
    "ordercode(sum(omega,fin(2))){}", "ordercode(prod(omegastar,omega)){0:1,4:1}",
])
def test_tape_text_round_trip(text):
    assert format_tape(parse_tape(text)) == text


def test_generator_text_canonicalizes():
    assert format_generator(parse_generator("periodic(1;01)")) == "periodic(;10)"
    assert format_spec(parse_spec("prod(fin(3),omegastar)")) == "prod(fin(3),omegastar)"


@pytest.mark.parametrize("text", ["const(2)", "periodic(1;)", "ordercode(foo)", "const(0){x:1}", "const(0) junk"])
def test_bad_expressions(text):
    with pytest.raises(ExpressionError):
        parse_tape(text)


cells = st.dictionaries(st.integers(0, 40), st.integers(0, 1), max_size=12)
bases = st.sampled_from([Const(0), Const(1), Periodic((1,), (0, 1, 1)), OrderCode(Omega())])


@given(bases, st.lists(cells, min_size=1, max_size=5))
def test_block_limsup_is_cellwise_max(base, overrides):
    tapes = [Tape(base, o) for o in overrides]
    lim = block_limsup(tapes)
    for n in range(45):
        assert lim[n] == max(t[n] for t in tapes)


@given(bases, cells, st.integers(0, 50), st.integers(0, 1))
def test_write_then_read(base, ov, n, b):
    t = write(Tape(base, ov), n, b)
    assert t[n] == b
    assert t == Tape(base, dict(t.overrides))
    assert hash(t) == hash(Tape(base, dict(t.overrides)))
