"""Boolean-valued execution over a generic input.

Conditions are finite bit strings fixing an initial segment of the input.
The simulation keeps a *cover*: a prefix-free set of conditions, complete in
the sense that every infinite input extends exactly one of them, each paired
with the concrete configuration every input below it produces.  A branch
splits when the head reads an input cell its condition leaves open, and
sibling branches merge again once their configurations agree.  An input
cell nobody has written holds the generic bit ``x[j]``; such a cell is
recorded as ``None``.

A :class:`ForcedFactTable` is the cover read as facts: every fact maps to
the antichain of minimal conditions forcing it, tidied so that two sibling
conditions forcing the same fact are replaced by their parent.  Open
input cells are kept apart in ``generic``: below a listed condition, a
string forces ``input[j] = b`` exactly when its own bit ``j`` is ``b``.

Tracking is limited to cells ``0 .. window-1`` and conditions of length at
most ``depth``; leaving either raises :class:`ForcingHorizon`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .machine import HALT, LIMIT, START, Program, Snapshot, initial_snapshot, step
from .ordinal import ZERO, Ordinal, add, ONE, format_ordinal, next_limit
from .runner import RunConfig, take_limit
from .tape import Tape

__all__ = [
    "CellValue", "HeadAt", "InState", "Fact", "Config", "ForcedFactTable",
    "ForcingError", "ForcingHorizon", "NoLasso",
    "tidy", "initial_table", "boolean_step", "boolean_limit", "forces",
    "validate_table", "collapse_check", "CollapseReport", "format_fact", "dump_table",
    "DEFAULT_WINDOW", "DEFAULT_DEPTH",
]

DEFAULT_WINDOW = 64
DEFAULT_DEPTH = 16
TAPES = ("input", "work", "output")


class ForcingError(ValueError):
    pass


class ForcingHorizon(ForcingError):
    """The head left the window or read an input cell beyond the depth."""


class NoLasso(ForcingError):
    pass


class CellValue(NamedTuple):
    tape: str
    pos: int
    bit: int


class HeadAt(NamedTuple):
    pos: int


class InState(NamedTuple):
    state: str


Fact = Union[CellValue, HeadAt, InState]


class Config(NamedTuple):
    state: str
    head: int
    inp: Tuple[Optional[int], ...]
    work: Tuple[int, ...]
    out: Tuple[int, ...]


def _fact_key(f: Fact):
    if isinstance(f, InState):
        return (0, f.state, 0, 0)
    if isinstance(f, HeadAt):
        return (1, "", f.pos, 0)
    return (2, f.tape, f.pos, f.bit)


def _cond_key(c: str):
    return (len(c), c)


def _flip(c: str) -> str:
    return c[:-1] + ("1" if c[-1] == "0" else "0")


def tidy(conds) -> Tuple[str, ...]:
    """Minimal antichain with sibling pairs replaced by their parent, repeatedly."""
    s = set(conds)
    while True:
        s = {c for c in s if not any(c[:k] in s for k in range(len(c)))}
        merged = False
        for c in sorted(s, key=len, reverse=True):
            if c and c in s and _flip(c) in s:
                s -= {c, _flip(c)}
                s.add(c[:-1])
                merged = True
        if not merged:
            return tuple(sorted(s, key=_cond_key))


@dataclass(frozen=True)
class ForcedFactTable:
    stage: Ordinal
    entries: Dict[Fact, Tuple[str, ...]]
    generic: Dict[int, Tuple[str, ...]] = field(default_factory=dict)
    branches: Tuple[Tuple[str, Config], ...] = ()
    window: int = DEFAULT_WINDOW
    depth: int = DEFAULT_DEPTH

    def all_halted(self) -> bool:
        return bool(self.branches) and all(cfg.state == HALT for _, cfg in self.branches)


def _branch_facts(c: str, cfg: Config, depth: int):
    yield InState(cfg.state)
    yield HeadAt(cfg.head)
    for n, v in enumerate(cfg.inp):
        if v is None and n < len(c):
            v = int(c[n])
        if v is None:
            if n < depth:
                yield n  # generic cell
        else:
            yield CellValue("input", n, v)
    for n, v in enumerate(cfg.work):
        yield CellValue("work", n, v)
    for n, v in enumerate(cfg.out):
        yield CellValue("output", n, v)


def _table(stage: Ordinal, branches: Dict[str, Config], window: int, depth: int) -> ForcedFactTable:
    holders: Dict = {}
    for c, cfg in branches.items():
        for f in _branch_facts(c, cfg, depth):
            holders.setdefault(f, []).append(c)
    entries, generic = {}, {}
    for f in sorted(holders, key=lambda f: (1, f) if isinstance(f, int) else (0, _fact_key(f))):
        conds = holders[f]
        anti = ("",) if len(conds) == len(branches) else tidy(conds)
        if isinstance(f, int):
            generic[f] = anti
        else:
            entries[f] = anti
    ordered = tuple(sorted(branches.items(), key=lambda kv: _cond_key(kv[0])))
    return ForcedFactTable(stage, entries, generic, ordered, window, depth)


def _merge(branches: Dict[str, Config]) -> Dict[str, Config]:
    d = dict(branches)
    merged = True
    while merged:
        merged = False
        for c in sorted(d, key=len, reverse=True):
            if c and c in d and _flip(c) in d and d[c] == d[_flip(c)]:
                d[c[:-1]] = d.pop(c)
                del d[_flip(c)]
                merged = True
    return d


def initial_table(p: Program, window: int = DEFAULT_WINDOW, depth: int = DEFAULT_DEPTH) -> ForcedFactTable:
    if p.uses_oracle:
        raise ForcingError("forcing runs programs without an oracle")
    cfg = Config(START, 0, (None,) * window, (0,) * window, (0,) * window)
    return _table(ZERO, {"": cfg}, window, depth)


def _successors(p: Program, c: str, cfg: Config, window: int, depth: int):
    if cfg.state == HALT:
        yield c, cfg
        return
    h = cfg.head
    known = cfg.inp[h]
    if known is None and h >= len(c):
        if h >= depth:
            raise ForcingHorizon(f"input cell {h} is beyond the condition depth {depth}")
        exts = [c + "".join(bits) for bits in itertools.product("01", repeat=h + 1 - len(c))]
    else:
        exts = [c]
    for e in exts:
        bit = known if known is not None else int(e[h])
        act = p.transitions[(cfg.state, (bit, cfg.work[h], cfg.out[h]))]
        i, w, o = act.write
        inp = list(cfg.inp)
        if not (known is None and i == bit):  # rewriting the generic bit keeps it generic
            inp[h] = i
        head = h + 1 if act.move == "R" else max(h - 1, 0)
        if head >= window:
            raise ForcingHorizon(f"head left the window of {window} cells")
        work = cfg.work[:h] + (w,) + cfg.work[h + 1:]
        out = cfg.out[:h] + (o,) + cfg.out[h + 1:]
        yield e, Config(act.next, head, tuple(inp), work, out)


def boolean_step(p: Program, t: ForcedFactTable) -> ForcedFactTable:
    if not t.branches:
        raise ForcingError("table carries no branch data")
    if t.all_halted():
        raise ForcingError("every branch has halted")
    nxt = {}
    for c, cfg in t.branches:
        for e, new in _successors(p, c, cfg, t.window, t.depth):
            nxt[e] = new
    return _table(add(t.stage, ONE), _merge(nxt), t.window, t.depth)


def _find_lasso(history: Sequence[ForcedFactTable]) -> Tuple[int, int]:
    last = len(history) - 1
    for n in range(last):
        if history[n].branches == history[last].branches:
            return n, last
    raise NoLasso("the table sequence has not repeated")


def _limit_bit(values):
    if 1 in values:
        return 1
    if None in values:
        return None  # max(0, x[j]) is x[j]
    return 0


def boolean_limit(history: Sequence[ForcedFactTable]) -> ForcedFactTable:
    """Limit table after a history whose last table repeats an earlier one."""
    n, m = _find_lasso(history)
    cycle = history[n:m]
    lookups = [dict(t.branches) for t in cycle]
    conds = set().union(*lookups)
    leaves = [c for c in conds if not any(d != c and d.startswith(c) for d in conds)]
    first = cycle[0]
    out = {}
    for leaf in leaves:
        cfgs = [next(lk[leaf[:k]] for k in range(len(leaf) + 1) if leaf[:k] in lk) for lk in lookups]
        if cfgs[0].state == HALT:
            out[leaf] = cfgs[0]
            continue
        W = first.window
        out[leaf] = Config(
            LIMIT, 0,
            tuple(_limit_bit({c.inp[j] for c in cfgs}) for j in range(W)),
            tuple(max(c.work[j] for c in cfgs) for j in range(W)),
            tuple(max(c.out[j] for c in cfgs) for j in range(W)),
        )
    return _table(next_limit(first.stage, 1), _merge(out), first.window, first.depth)


def forces(t: ForcedFactTable, q: str, f: Fact) -> bool:
    """Does ``q`` extend a recorded condition, or do recorded conditions bar ``q``?"""
    recorded = t.entries.get(f, ())
    generic = ()
    if isinstance(f, CellValue) and f.tape == "input":
        generic = t.generic.get(f.pos, ())

    def covered(r: str) -> bool:
        if any(r.startswith(c) for c in recorded):
            return True
        below_generic = any(r.startswith(g) for g in generic)
        if below_generic and len(r) > f.pos:
            return int(r[f.pos]) == f.bit
        if len(r) >= t.depth:
            return False
        if not below_generic and not any(c.startswith(r) for c in recorded + generic):
            return False
        return covered(r + "0") and covered(r + "1")

    return covered(q)


def validate_table(t: ForcedFactTable) -> List[str]:
    """Antichain, tidiness, consistency and totality problems of a table."""
    problems = []
    for f, anti in t.entries.items():
        s = set(anti)
        if any(c[:k] in s for c in s for k in range(len(c))):
            problems.append(f"{format_fact(f)}: not an antichain")
        if any(c and _flip(c) in s for c in s):
            problems.append(f"{format_fact(f)}: sibling pair left untidied")
    for tape in ("work", "output"):
        for n in range(t.window):
            zero = t.entries.get(CellValue(tape, n, 0), ())
            one = t.entries.get(CellValue(tape, n, 1), ())
            if any(a.startswith(b) or b.startswith(a) for a in zero for b in one):
                problems.append(f"{tape}[{n}]: some condition forces both values")
            elif t.branches and tidy(zero + one) != ("",):
                problems.append(f"{tape}[{n}]: value not decided along every branch")
    return problems


def _holds(f: Fact, s: Snapshot) -> bool:
    if isinstance(f, InState):
        return s.state == f.state
    if isinstance(f, HeadAt):
        return s.head == f.pos
    return s.tapes[TAPES.index(f.tape)][f.pos] == f.bit


def _violations(t: ForcedFactTable, s: Snapshot, xbits: str) -> List[str]:
    problems = []
    stage = format_ordinal(t.stage)

    def shortest(anti):
        hits = [c for c in anti if xbits.startswith(c)]
        return min(hits, key=len) if hits else None

    for f, anti in t.entries.items():
        q = shortest(anti)
        if q is not None and not _holds(f, s):
            problems.append(f"stage {stage}: '{q}' forces {format_fact(f)} but the run disagrees")
    for n, anti in t.generic.items():
        q = shortest(anti)
        if q is not None and n < len(xbits) and s.input[n] != int(xbits[n]):
            problems.append(f"stage {stage}: '{xbits[:n + 1]}' forces input[{n}]={xbits[n]} "
                            f"but the run disagrees")
    for f in [InState(s.state), HeadAt(s.head)] + [
            CellValue(tape, n, s.tapes[k][n]) for k, tape in enumerate(TAPES) for n in range(t.window)]:
        if isinstance(f, CellValue) and f.tape == "input" and f.pos >= len(xbits):
            continue
        if not forces(t, xbits, f):
            problems.append(f"stage {stage}: '{xbits}' leaves {format_fact(f)} undecided")
    return problems


@dataclass(frozen=True)
class CollapseReport:
    problems: Tuple[str, ...]
    stages_checked: int
    limit_checked: bool
    aborted: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.problems and self.aborted is None


def _concrete_limit(p: Program, x: Tape, horizon: int):
    """First omega-limit of the direct run, or None when it halts first."""
    s = initial_snapshot(x)
    seen = {s: 0}
    snaps = [s]
    for k in range(1, horizon + 1):
        s = step(p, s)
        if s.state == HALT:
            return None
        if s in seen:
            return take_limit(snaps[seen[s]:])
        seen[s] = k
        snaps.append(s)
    raise ForcingHorizon("direct run found no repetition within the horizon")


def collapse_check(p: Program, x: Tape, cfg: RunConfig = RunConfig(), successor_stages: int = 50,
                   window: int = DEFAULT_WINDOW, depth: int = DEFAULT_DEPTH,
                   transform: Callable[[ForcedFactTable], ForcedFactTable] = None) -> CollapseReport:
    """Compare the Boolean tables along ``x`` with the direct run of ``p`` on ``x``.

    Successor stages are checked until the table sequence has repeated and
    at least ``successor_stages`` steps have been compared; then the first
    omega-limit is checked.  ``transform`` is applied to every table before
    comparison, which lets tests plant a corrupted entry.
    """
    xbits = "".join(str(x[n]) for n in range(depth))
    tweak = transform or (lambda t: t)
    problems: List[str] = []
    try:
        t = initial_table(p, window, depth)
        s = initial_snapshot(x)
        history = [t]
        seen = {t.branches: 0}
        lasso = None
        problems += _violations(tweak(t), s, xbits)
        k = 0
        while not t.all_halted() and k < cfg.max_steps_per_block:
            if lasso is not None and k >= successor_stages:
                break
            t = boolean_step(p, t)
            k += 1
            if s.state != HALT:
                s = step(p, s)
            history.append(t)
            problems += _violations(tweak(t), s, xbits)
            if lasso is None and t.branches in seen:
                lasso = k
            seen.setdefault(t.branches, k)
        if t.all_halted() or s.state == HALT:
            return CollapseReport(tuple(problems), k, False)
        if lasso is None:
            return CollapseReport(tuple(problems), k, False, "tables did not repeat within the horizon")
        limit = boolean_limit(history[:lasso + 1])
        direct = _concrete_limit(p, x, cfg.max_steps_per_block)
        if direct is None:
            problems.append("direct run halted before the first limit but the tables did not")
        else:
            problems += _violations(tweak(limit), direct, xbits)
        return CollapseReport(tuple(problems), k, True)
    except ForcingHorizon as exc:
        return CollapseReport(tuple(problems), 0, False, str(exc))


def format_fact(f: Fact) -> str:
    if isinstance(f, InState):
        return f"state={f.state}"
    if isinstance(f, HeadAt):
        return f"head={f.pos}"
    return f"{f.tape}[{f.pos}]={f.bit}"


def _fmt_conds(anti) -> str:
    return "{" + ",".join(c or "<>" for c in anti) + "}"


def dump_table(t: ForcedFactTable) -> List[str]:
    """``stage<TAB>fact<TAB>{antichain}`` lines; ``<>`` is the empty condition."""
    stage = format_ordinal(t.stage)
    lines = [f"{stage}\t{format_fact(f)}\t{_fmt_conds(a)}" for f, a in t.entries.items()]
    lines += [f"{stage}\tinput[{n}]=x[{n}]\t{_fmt_conds(a)}" for n, a in t.generic.items()]
    return lines
