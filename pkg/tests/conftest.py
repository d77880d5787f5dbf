import pytest

from ittm.programs import stdlib_program
from ittm.runner import RunConfig
from ittm.tape import Const, Periodic, Tape


@pytest.fixture
def zero():
    return Tape(Const(0))


@pytest.fixture
def small_cfg():
    return RunConfig(max_steps_per_block=512, max_tower=3, max_history=256)


def periodic_inputs(n=20):
    """Deterministic list of distinct eventually periodic inputs."""
    out = []
    k = 0
    while len(out) < n:
        prefix = tuple((k >> b) & 1 for b in range(k % 3))
        cycle = tuple(((k * 7 + 3) >> b) & 1 for b in range(1 + k % 4))
        t = Tape(Periodic(prefix, cycle))
        if t not in out:
            out.append(t)
        k += 1
    return out


STDLIB = ["halt-now", "halt-at-limit", "halt-at-omega-squared", "mark-forever",
          "blinker", "repeat-escape", "copy-input"]


def program(name):
    return stdlib_program(name)


LIMSUP_STATS = {"checked": 0}


@pytest.fixture(autouse=True)
def _limsup_oracle():
    """Every level-1 limit taken by any test is re-derived by brute force."""
    from oracles import EngineRecorder
    with EngineRecorder() as rec:
        yield rec
    problems = rec.problems()
    LIMSUP_STATS["checked"] += sum(1 for _ in rec.level1_limits())
    assert not problems, problems[:5]
