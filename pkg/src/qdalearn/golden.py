"""Hand-encoded automata used as golden references.

* ``sorted_prefix_qda``: successor-sortedness of a list segment up to ``i``
  (not elastic: a blank after ``y1`` escapes to ``true``).
* ``sorted_prefix_eqda``: the elastic counterpart, blank loop after ``y1``.
* ``even_sorted_qda``: data at even positions is sorted; the ``redirect``
  variant sends the blank out of ``q3`` to ``q5`` instead of back to ``q2``.
* ``list_find_eqda``: learned list-find invariant with pointers ``head``,
  ``cur`` and key ``k``.
"""

from __future__ import annotations

import itertools

from .automaton import Qda
from .lattice import BOTTOM, TOP, Register, Scalar, Universe, lit, saturate
from .words import BLANK, NIL, Letter, letter

Y1, Y2 = Register("y1"), Register("y2")
K = Scalar("k")


def full_alphabet(pointers, variables) -> list[Letter]:
    pointers = sorted(pointers)
    out = []
    for r in range(len(pointers) + 1):
        for ps in itertools.combinations(pointers, r):
            for y in [None, *variables]:
                out.append(Letter(frozenset(ps), y))
    return out


def _sorted_prefix(elastic: bool) -> Qda:
    u = Universe([Y1, Y2])
    le = saturate([lit(Y1, "<=", Y2)], u)
    alphabet = full_alphabet(["head", "i"], ["y1", "y2"])
    d = {}
    d[(0, letter("head"))] = 1
    for y in (None, "y1", "y2"):
        d[(0, letter(["head", "i"], y))] = 5
        d[(1, letter("i", y))] = 5
    d[(0, letter("head", "y2"))] = 5
    d[(0, letter("head", "y1"))] = 2
    d[(1, letter((), "y1"))] = 2
    d[(1, letter((), "y2"))] = 5
    d[(1, BLANK)] = 1
    d[(2, letter((), "y2"))] = 3
    d[(2, BLANK)] = 2 if elastic else 5
    d[(2, letter("i"))] = 5
    d[(2, letter("i", "y2"))] = 4
    d[(3, letter("i"))] = 4
    d[(3, BLANK)] = 3
    d[(4, BLANK)] = 4
    for x in alphabet:
        d[(5, x)] = 5
    outputs = {0: BOTTOM, 1: BOTTOM, 2: BOTTOM, 3: BOTTOM, 4: le, 5: TOP}
    return Qda(0, d, outputs, alphabet=alphabet, pointers={"head", "i"}, variables={"y1", "y2"})


def sorted_prefix_qda() -> Qda:
    return _sorted_prefix(elastic=False)


def sorted_prefix_eqda() -> Qda:
    return _sorted_prefix(elastic=True)


def even_sorted_qda(redirect: bool = False) -> Qda:
    le = saturate([lit(Y1, "<=", Y2)], Universe([Y1, Y2]))
    b1, b2 = letter((), "y1"), letter((), "y2")
    d = {
        (0, BLANK): 1, (0, b1): 5, (0, b2): 7,
        (1, BLANK): 0, (1, b1): 2, (1, b2): 7,
        (2, BLANK): 3, (2, b2): 6,
        (3, BLANK): 5 if redirect else 2, (3, b2): 4,
        (4, BLANK): 4,
        (5, BLANK): 5, (5, b2): 6,
        (6, BLANK): 6,
        (7, BLANK): 7, (7, b1): 6,
    }
    outputs = {q: BOTTOM for q in range(8)}
    outputs[4] = le
    outputs[6] = TOP
    return Qda(0, d, outputs, pointers=(), variables={"y1", "y2"})


LIST_FIND_UNIVERSE = Universe([Y1, Y2, K])


def list_find_eqda() -> Qda:
    """The list-find invariant automaton, with the key cell read after the nil block.

    Transitions for valuations outside the drawn paths (a universal variable on
    ``nil``/``k``, or ``y2`` read before ``y1``) lead to the all-accepting
    state ``top``.
    """
    u = LIST_FIND_UNIVERSE
    f13 = saturate([lit(Y1, "<=", Y2), lit(Y1, "<", K), lit(Y2, "<", K)], u)
    f11 = saturate([lit(Y1, "<=", Y2), lit(Y1, "<", K)], u)
    f9 = saturate([lit(Y1, "<=", Y2)], u)
    pv = {NIL, "head", "cur", "k"}
    alphabet = full_alphabet(sorted(pv), ["y1", "y2"])
    d = {
        (0, letter(NIL)): "1k",
        ("1k", letter("k")): 1,
        (0, letter([NIL, "cur"])): "2k",
        ("2k", letter("k")): 2,
        (2, letter("head")): 8,
        (8, BLANK): 8,
        (8, letter((), "y1")): 7,
        (2, letter("head", "y1")): 7,
        (7, BLANK): 7,
        (7, letter((), "y2")): 13,
        (13, BLANK): 13,
        (1, letter("head", "y1")): 4,
        (4, BLANK): 4,
        (4, letter((), "y2")): 10,
        (10, BLANK): 10,
        (10, letter("cur")): 13,
        (12, BLANK): 12,
        (11, BLANK): 11,
        (12, letter((), "y2")): 11,
        (4, letter("cur")): 12,
        (4, letter("cur", "y2")): 11,
        (1, letter("head")): 6,
        (6, letter((), "y1")): 4,
        (6, BLANK): 6,
        (6, letter("cur", "y1")): 3,
        (3, BLANK): 3,
        (5, letter((), "y1")): 3,
        (5, BLANK): 5,
        (6, letter("cur")): 5,
        (1, letter(["head", "cur"], "y1")): 3,
        (3, letter((), "y2")): 9,
        (9, BLANK): 9,
        (14, BLANK): 14,
        (1, letter(["head", "cur"])): 14,
        (14, letter((), "y1")): 3,
    }
    outputs = {q: BOTTOM for q in [0, 1, 2, "1k", "2k", 3, 4, 5, 6, 7, 8, 10, 12, 14]}
    outputs.update({13: f13, 11: f11, 9: f9, "top": TOP})
    states = list(outputs)
    seen_y1 = _states_after_y1(d)
    for q in states:
        if q == "top":
            continue
        for x in alphabet:
            if (q, x) in d or x.var is None:
                continue
            on_aux = bool(x.pointers & {NIL, "k"})
            early_y2 = x.var == "y2" and q not in seen_y1
            if on_aux or early_y2:
                d[(q, x)] = "top"
    for x in alphabet:
        d[("top", x)] = "top"
    return Qda(0, d, outputs, alphabet=alphabet, pointers=pv, variables={"y1", "y2"})


def _states_after_y1(d) -> set:
    after = {r for (q, x), r in d.items() if x.var == "y1"}
    changed = True
    while changed:
        changed = False
        for (q, x), r in d.items():
            if q in after and r not in after:
                after.add(r)
                changed = True
    return after
