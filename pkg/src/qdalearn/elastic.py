"""Elastic automata and elastification.

An automaton is elastic when every blank transition is a self-loop.  Blank
transitions into dead states are ignored: they are indistinguishable from an
undefined transition, and a completed machine has them everywhere.

``elastify`` is the blank-closure subset construction.  It works on the trimmed
automaton so that a blank edge into the implicit sink does not count as a
defined blank transition.
"""

from __future__ import annotations

from collections import deque

from .automaton import Qda, dead_states, minimize, reachable, trim
from .lattice import join_all
from .words import BLANK


def is_elastic(a: Qda) -> bool:
    dead = dead_states(a)
    live = set(reachable(a)) - dead
    for q in live:
        r = a.delta.get((q, BLANK))
        if r is not None and r not in dead and r != q:
            return False
    return True


def blank_closure(a: Qda, states) -> frozenset:
    out = set(states)
    todo = list(out)
    while todo:
        q = todo.pop()
        r = a.delta.get((q, BLANK))
        if r is not None and r not in out:
            out.add(r)
            todo.append(r)
    return frozenset(out)


def _join_outputs(a: Qda, s: frozenset):
    return join_all(a.outputs[q] for q in s)


def elastify(a: Qda, *, minimal: bool = True) -> Qda:
    """Least elastic over-approximation of ``a``'s valuation language."""
    t = trim(a)
    start = blank_closure(t, [t.initial])
    seen = {start}
    queue = deque([start])
    delta = {}
    while queue:
        s = queue.popleft()
        for x in t.alphabet:
            if x == BLANK:
                if any((q, BLANK) in t.delta for q in s):
                    delta[(s, x)] = s
                continue
            succ = {t.delta[(q, x)] for q in s if (q, x) in t.delta}
            if not succ:
                continue
            r = blank_closure(t, succ)
            delta[(s, x)] = r
            if r not in seen:
                seen.add(r)
                queue.append(r)
    outputs = {s: _join_outputs(t, s) for s in seen}
    out = t.with_(initial=start, delta=delta, outputs=outputs)
    return minimize(out) if minimal else out
