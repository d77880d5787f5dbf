"""The count-through machine, generated from a transition function.

It erases the minimal elements of a coded relation round by round and
halts once nothing remains; if some round finds remaining elements but no
minimal one, it parks in a loop forever.

Layout: cells come in blocks of four, and ``ph`` is the cell index mod 4.
Block 0 is the header.  Its work cells hold the phase flags A, B, C and
the dead flag D.  Its output cells hold the left sentinel (cell 0), the
"something remains" flag R (cell 1) and the "minimal element found" flag M
(cell 2).  Block n+1 holds element n: erased mark E, has-predecessor flag
F, and the markers Mi and Mj for the pair being examined.  While the pairs
are scanned, output cell p+4 marks input position p.

A round is a rightward sweep over every p, setting F(j) when
``x[pair(i, j)] = 1`` and i is not erased.  A second sweep then erases the
remaining elements whose F is clear.  The flags read at each limit say
which sweep just ended.  Any other flag pattern means the limit closes a
limit of rounds; a cleanup sweep then wipes the markers.

``pl`` tracks whether the position marker is at or to the left of the head.
"""
from __future__ import annotations

from collections import deque
from functools import lru_cache

from .machine import HALT, LIMIT, START, Action, Program

KEEP = None

_FLAGSETS = {
    "NEW": ((1, 0, 0, 0), "initA"),
    "B": ((0, 1, 0, 0), "swB"),
    "CLEAN": ((0, 0, 1, 0), "swC"),
}
_SF_OUTPUT = (1, 0, 0, 0)  # sentinel set, R and M cleared

_THEN = {
    "fMi": ("fMi", 1, 1, 0),
    "fMjF": ("fMjF", 1, 1, 0),
    "advI": ("advI", 1, 1, 0, 0),
    "incMj": ("incMj", 1, 1, 0),
    "rstMj": ("rstMj", 1, 0),
    "Bfl1": ("Bfl", 1),
    "Bfl0": ("Bfl", 0),
}


def _r(ph):
    return (ph + 1) % 4


def _l(ph):
    return (ph - 1) % 4


def delta(state, scanned):
    """Return ``(write, move, next_state)``; ``None`` in ``write`` keeps a bit."""
    i, w, o = scanned
    keep = (KEEP, KEEP, KEEP)
    name, *a = state

    if name in (START, LIMIT):
        return keep, "R", ("disp", 1, w)
    if name == "disp":
        k, *bits = a
        if k < 3:
            return keep, "R", ("disp", k + 1, *bits, w)
        if w == 1:
            return keep, "L", ("stuck",)
        flags = tuple(bits)
        if flags == (1, 0, 0):
            return delta(("sf", 3, "B"), scanned)
        if flags == (0, 1, 0):
            return keep, "L", ("chk2",)
        if flags in ((0, 0, 1), (0, 0, 0)):
            return delta(("sf", 3, "NEW"), scanned)
        return delta(("sf", 3, "CLEAN"), scanned)
    if name == "sf":
        k, which = a
        flags, nxt = _FLAGSETS[which]
        wr = (KEEP, flags[k], _SF_OUTPUT[k])
        if k > 0:
            return wr, "L", ("sf", k - 1, which)
        return wr, "R", (nxt, 1) if nxt == "initA" else (nxt, 1, 1, 0, 0) if nxt == "swB" else (nxt, 1, 1)
    if name == "chk2":
        return keep, "L", ("chk1", o)
    if name == "chk1":
        (m,) = a
        if o == 0:
            return keep, "R", (HALT,)
        return keep, "R", ("to3",) if m else ("toD",)
    if name == "toD":
        return keep, "R", ("setD",)
    if name == "setD":
        return (KEEP, 1, KEEP), "L", ("stuck",)
    if name == "to3":
        return keep, "R", ("sf", 3, "NEW")
    if name == "stuck":
        return keep, "L", ("stuck",)

    # -- round setup: marker for p = 1, Mj(0) at cell 7, Mi(1) at cell 10
    if name == "initA":
        (c,) = a
        if c == 5:
            return (KEEP, KEEP, 1), "R", ("initA", 6)
        if c == 7:
            return (KEEP, 1, KEEP), "R", ("initA", 8)
        if c == 10:
            return (KEEP, 1, KEEP), "L", ("toP", 1, 1, "proc")
        return keep, "R", ("initA", c + 1)

    # -- navigation
    if name == "toP":
        ph, pl, then = a
        if o == 1:
            return delta(("A_atP", ph) if then == "proc" else ("adv0", ph), scanned)
        if pl:
            return keep, "L", ("toP", _l(ph), 1, then)
        return keep, "R", ("toP", _r(ph), 0, then)
    if name == "toH":
        ph, pl, then = a
        if pl and o == 1:
            return keep, "L", ("toH", _l(ph), 0, then)
        if not pl and ph == 0 and o == 1:
            return keep, "R", _THEN[then]
        return keep, "L", ("toH", _l(ph), pl, then)

    # -- sweep A: one pair per visit to the marker
    if name == "A_atP":
        (ph,) = a
        return keep, "L", ("A_back", 3, _l(ph))
    if name == "A_back":
        r, ph = a
        if r > 0:
            return keep, "L", ("A_back", r - 1, _l(ph))
        if i == 0:
            return keep, "R", ("A_fwd", 3, _r(ph))
        return delta(("toH", ph, 0, "fMi"), scanned)
    if name == "A_fwd":
        r, ph = a
        if r > 0:
            return keep, "R", ("A_fwd", r - 1, _r(ph))
        return delta(("adv0", ph), scanned)
    if name in ("fMi", "fMjF", "incMj"):
        ph, hdr, pl = a
        if hdr:
            return keep, "R", (name, _r(ph), int(ph != 3), pl)
        target = 2 if name == "fMi" else 3
        if ph == target and w == 1:
            if name == "fMi":
                return keep, "L", ("rdE", 1, _l(ph), int(pl and not o))
            if name == "fMjF":
                return keep, "L", ("wrF", 1, _l(ph), int(pl and not o))
            return (KEEP, 0, KEEP), "R", ("incR", 3, _r(ph), int(pl or o))
        return keep, "R", (name, _r(ph), 0, int(pl or o))
    if name == "rdE":
        r, ph, pl = a
        if r > 0:
            return keep, "L", ("rdE", r - 1, _l(ph), int(pl and not o))
        if w == 1:
            return delta(("toP", ph, pl, "adv"), scanned)
        return delta(("toH", ph, pl, "fMjF"), scanned)
    if name == "wrF":
        r, ph, pl = a
        if r > 0:
            return keep, "L", ("wrF", r - 1, _l(ph), int(pl and not o))
        return (KEEP, 1, KEEP), "R", ("toP", _r(ph), int(pl or o), "adv")

    # -- advance p and (i, j) to the next pair in diagonal order
    if name == "adv0":
        (ph,) = a
        return (KEEP, KEEP, 0), "R", ("adv1", _r(ph))
    if name == "adv1":
        (ph,) = a
        return (KEEP, KEEP, 1), "L", ("toH", _l(ph), 0, "advI")
    if name == "advI":
        ph, hdr, blk1, pl = a
        if hdr:
            return keep, "R", ("advI", _r(ph), int(ph != 3), int(ph == 3), pl)
        if ph == 2 and w == 1:
            if blk1:
                return (KEEP, 0, KEEP), "R", ("rstFindMj", _r(ph), int(pl or o))
            return (KEEP, 0, KEEP), "L", ("decMi", 3, _l(ph), int(pl and not o))
        return keep, "R", ("advI", _r(ph), 0, int(blk1 and ph != 3), int(pl or o))
    if name == "decMi":
        r, ph, pl = a
        if r > 0:
            return keep, "L", ("decMi", r - 1, _l(ph), int(pl and not o))
        return (KEEP, 1, KEEP), "L", ("toH", _l(ph), int(pl and not o), "incMj")
    if name == "incR":
        r, ph, pl = a
        if r > 0:
            return keep, "R", ("incR", r - 1, _r(ph), int(pl or o))
        return (KEEP, 1, KEEP), "R", ("toP", _r(ph), int(pl or o), "proc")
    if name == "rstFindMj":
        ph, pl = a
        if ph == 3 and w == 1:
            return (KEEP, 0, KEEP), "R", ("rstR", 3, _r(ph), int(pl or o))
        return keep, "R", ("rstFindMj", _r(ph), int(pl or o))
    if name == "rstR":
        r, ph, pl = a
        if r > 0:
            return keep, "R", ("rstR", r - 1, _r(ph), int(pl or o))
        return keep, "L", ("rstSetMi", _l(ph), int(pl and not o))
    if name == "rstSetMi":
        ph, pl = a
        return (KEEP, 1, KEEP), "L", ("toH", _l(ph), int(pl and not o), "rstMj")
    if name == "rstMj":
        c, pl = a
        if c == 7:
            return (KEEP, 1, KEEP), "R", ("toP", 0, int(pl or o), "proc")
        return keep, "R", ("rstMj", c + 1, int(pl or o))

    # -- sweep B: erase remaining elements with no remaining predecessor
    if name == "swB":
        ph, hdr, e, f = a
        if hdr:
            return keep, "R", ("swB", _r(ph), int(ph != 3), 0, 0)
        if ph == 0:
            return keep, "R", ("swB", 1, 0, w, 0)
        if ph == 1:
            return (KEEP, 0, KEEP), "R", ("swB", 2, 0, e, w)
        if ph == 2:
            return (KEEP, 0, KEEP), "R", ("swB", 3, 0, e, f)
        if e == 1:
            return (KEEP, 0, KEEP), "R", ("swB", 0, 0, 0, 0)
        return keep, "L", ("Bback", 2, f)
    if name == "Bback":
        r, f = a
        if r > 0:
            return keep, "L", ("Bback", r - 1, f)
        wr = (KEEP, 1, KEEP) if f == 0 else keep
        return wr, "L", ("toH", 3, 0, "Bfl1" if f == 0 else "Bfl0")
    if name == "Bfl":
        (set_m,) = a
        return (KEEP, KEEP, 1), "R", ("Bfl2", set_m)
    if name == "Bfl2":
        (set_m,) = a
        return (KEEP, KEEP, 1 if set_m else KEEP), "R", ("Bcur", 3, 1)
    if name == "Bcur":
        ph, hdr = a
        if hdr:
            return keep, "R", ("Bcur", 0, 0)
        if ph == 3 and w == 1:
            return (KEEP, 0, KEEP), "R", ("swB", 0, 0, 0, 0)
        return keep, "R", ("Bcur", _r(ph), 0)

    # -- sweep C: wipe everything except the erased marks
    if name == "swC":
        ph, hdr = a
        if hdr:
            return keep, "R", ("swC", _r(ph), int(ph != 3))
        if ph == 0:
            return (KEEP, KEEP, 0), "R", ("swC", 1, 0)
        return (KEEP, 0, 0), "R", ("swC", _r(ph), 0)

    raise KeyError(f"no routine for state {state!r}")


def state_name(state) -> str:
    if len(state) == 1:
        return state[0]
    return "_".join(str(x) for x in state)


@lru_cache(maxsize=None)
def count_through_program() -> Program:
    """Materialise every state reachable from ``start`` and ``limit``."""
    cases = [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    table = {}
    todo = deque([(START,), (LIMIT,)])
    seen = set(todo)
    while todo:
        st = todo.popleft()
        for scanned in cases:
            wr, move, nxt = delta(st, scanned)
            written = tuple(s if x is KEEP else x for s, x in zip(scanned, wr))
            table[(state_name(st), scanned)] = Action(written, move, state_name(nxt))
            if nxt[0] != HALT and nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return Program(table)
