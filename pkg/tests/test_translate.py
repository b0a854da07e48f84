import itertools

import pytest

from qdalearn import golden
from qdalearn.automaton import Acceptor, Qda, accepts_data_word
from qdalearn.checker import equiv_on_models, evaluator
from qdalearn.lattice import BOTTOM, TOP, Register, Universe, lit, saturate
from qdalearn.logic import (
    Forall, Implies, PtrNull, Reach, Succ, names_of, parse, subformulas,
)
from qdalearn.programs import list_find_invariant, list_find_models
from qdalearn.translate import (
    NotElastic, emit_smtlib, normalize, simple_paths, to_apf, to_strand, weaken_pair,
)
from qdalearn.words import BLANK, NIL, DataCell, encode_config, letter

Y1, Y2 = Register("y1"), Register("y2")


@pytest.fixture(scope="module")
def list_find():
    return golden.list_find_eqda()


@pytest.fixture(scope="module")
def list_find_models_small():
    return [encode_config(c) for c in list_find_models(4, (0, 3))]


def brute_force_paths(a: Qda, targets):
    """Independent DFS: letter sequences reading every name once and ending in ``targets``."""
    names = set(a.pointers) | set(a.variables)
    out = []

    def go(q, seen, word):
        if seen == names:
            if q in targets:
                out.append(tuple(word))
            return
        for x in a.alphabet:
            if x == BLANK:
                continue
            got = set(x.pointers) | ({x.var} if x.var else set())
            if got & seen or not got <= names:
                continue
            r = a.delta.get((q, x))
            if r is not None:
                go(r, seen | got, word + [x])

    go(a.initial, set(), [])
    return out


def test_normalize_requires_elastic():
    with pytest.raises(NotElastic):
        normalize(golden.sorted_prefix_qda())


def test_normalize_sends_aux_placements_to_top(list_find):
    n = normalize(list_find)
    for x in n.alphabet:
        if x.var is not None and NIL in x.pointers:
            assert n.output_of((x,)) == TOP
            assert n.output_of((x, letter("k"), letter("head"), letter((), "y2"))) == TOP
    # outputs on words that keep universals off auxiliary cells are unchanged
    w = (letter([NIL, "cur"]), letter("k"), letter("head"), letter((), "y1"), BLANK,
         letter((), "y2"))
    assert n.output_of(w) == list_find.output_of(w) != BOTTOM


def test_normalize_keeps_data_word_language(list_find, list_find_models_small):
    n = normalize(list_find)
    a, b = Acceptor(list_find), Acceptor(n)
    for w in list_find_models_small[::7]:
        assert a(w) == b(w) == accepts_data_word(n, w)


def test_list_find_simple_paths(list_find):
    paths = simple_paths(normalize(list_find))
    complete = sorted(p.letters for p in paths if p.complete and p.final in (13, 11, 9))
    assert complete == sorted(brute_force_paths(list_find, {13, 11, 9}))
    assert len(complete) == 12


def test_single_path_guard(list_find):
    # nil block with cur, key cell, head, then y1 and y2 on later cells
    want = (letter([NIL, "cur"]), letter("k"), letter("head"), letter((), "y1"),
            letter((), "y2"))
    [p] = [p for p in simple_paths(normalize(list_find)) if p.letters == want]
    atoms = set(p.guard.parts)
    assert {PtrNull("cur"), Reach("head", "y1", True), Reach("y1", "y2", True)} <= atoms
    assert Succ(NIL, "k") in atoms and Succ("k", "head") in atoms
    assert p.body == saturate([lit(Y1, "<=", Y2), lit(Y1, "<", golden.K),
                               lit(Y2, "<", golden.K)], golden.LIST_FIND_UNIVERSE)
    assert not p.outside_fragment


def test_strand_agrees_with_automaton(list_find, list_find_models_small):
    t = to_strand(list_find)
    assert t.inside_fragment
    acc, ev = Acceptor(normalize(list_find)), evaluator(t.formula)
    for w in list_find_models_small:
        assert acc(w) == ev(w)


def test_apf_over_approximates(list_find, list_find_models_small):
    strand, apf = evaluator(to_strand(list_find).formula), evaluator(to_apf(list_find).formula)
    for w in list_find_models_small:
        if strand(w):
            assert apf(w)


def test_apf_never_orders_universals_strictly(list_find):
    f = to_apf(list_find).formula
    for g in subformulas(f):
        if isinstance(g, Implies):
            for a in subformulas(g.lhs):
                if isinstance(a, Reach) and {a.x, a.y} <= {"y1", "y2"}:
                    assert not a.strict


def test_list_find_matches_reference_beyond_single_cells(list_find):
    t = to_strand(list_find)
    ref = list_find_invariant()
    assert equiv_on_models(t.formula, ref, list_find_models(4, (0, 3)),
                           keep=lambda c: len(c.structures[0].cells) >= 2) is None
    # a single cell cannot host two universal variables, so the automaton says nothing there
    w = equiv_on_models(t.formula, ref, list_find_models(4, (0, 3)))
    assert w is not None and len(w.structures[0].cells) == 1


def test_weaken_pair():
    u = Universe([Y1, Y2])
    lt = saturate([lit(Y1, "<", Y2)], u)
    assert weaken_pair(lt, "y1", "y2") == saturate([lit(Y1, "<=", Y2)], u)
    ne = saturate([lit(Y1, "!=", Y2)], u)
    assert weaken_pair(ne, "y1", "y2").is_top
    assert weaken_pair(BOTTOM, "y1", "y2") == BOTTOM


def test_out_of_order_paths_are_renamed():
    # y2 is read before y1 on the only path; the output speaks about d(y2) <= d(y1)
    u = Universe([Y1, Y2])
    out = saturate([lit(Y2, "<=", Y1)], u)
    d = {(0, letter("p")): 1, (1, BLANK): 1, (1, letter((), "y2")): 2, (2, BLANK): 2,
         (2, letter((), "y1")): 3, (3, BLANK): 3}
    a = Qda(0, d, {0: BOTTOM, 1: BOTTOM, 2: BOTTOM, 3: out}, pointers={"p"},
            variables={"y1", "y2"})
    t = to_strand(a)
    [p] = [p for p in t.paths if p.complete]
    assert p.renaming == {"y2": "y1", "y1": "y2"}
    first = t.formula.parts[0]
    assert isinstance(first, Forall)
    assert Reach("y1", "y2", True) in first.body.lhs.parts
    assert first.body.rhs.formula == saturate([lit(Y1, "<=", Y2)], u)


def test_irrelevant_loop_base_cases():
    body = saturate([lit(Y1, "<", golden.K)], Universe([Y1, golden.K]))
    # loop after the universal letter only: dropped
    d = {(0, letter("p")): 1, (1, letter((), "y1")): 2, (2, BLANK): 2}
    a = Qda(0, d, {0: BOTTOM, 1: BOTTOM, 2: body}, pointers={"p"}, variables={"y1"})
    [p] = simple_paths(a)
    assert p.loops == (False, False, False)
    # loop before the universal letter only: dropped
    d = {(0, letter("p")): 1, (1, BLANK): 1, (1, letter((), "y1")): 2}
    a = Qda(0, d, {0: BOTTOM, 1: BOTTOM, 2: body}, pointers={"p"}, variables={"y1"})
    [p] = simple_paths(a)
    assert p.loops == (False, False, False)
    # loops on both sides are kept
    d = {(0, letter("p")): 1, (1, BLANK): 1, (1, letter((), "y1")): 2, (2, BLANK): 2}
    a = Qda(0, d, {0: BOTTOM, 1: BOTTOM, 2: body}, pointers={"p"}, variables={"y1"})
    [p] = simple_paths(a)
    assert p.loops == (False, True, True)


# -- SMT-LIB -------------------------------------------------------------------------


def sexprs(text: str):
    """Tiny s-expression reader: returns the list of top-level forms."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    stack: list[list] = [[]]
    for t in tokens:
        if t == "(":
            stack.append([])
        elif t == ")":
            assert len(stack) > 1, "unbalanced ')'"
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    assert len(stack) == 1, "unbalanced '('"
    return stack[0]


def symbols(form) -> set:
    if isinstance(form, list):
        return set().union(*(symbols(x) for x in form)) if form else set()
    return {form}


@pytest.mark.parametrize("flavor", ["strand", "apf"])
def test_smtlib_is_well_formed(list_find, flavor):
    t = to_strand(list_find) if flavor == "strand" else to_apf(list_find)
    text = emit_smtlib(t, flavor)
    forms = sexprs(text)
    heads = [f[0] for f in forms]
    assert "assert" in heads
    declared = {f[1] for f in forms if f[0] in ("declare-const", "declare-fun", "define-fun")}
    for name in names_of(t.formula) - {"y1", "y2"}:
        assert name in declared, name
    used = symbols([f for f in forms if f[0] == "assert"])
    assert "forall" in used


def raw_list_words(max_len, values):
    for n in range(1, max_len + 1):
        for i in range(n):
            for data in itertools.product(values, repeat=n):
                yield tuple(DataCell(frozenset({"head"} if p == 0 else ()) | frozenset(
                    {"i"} if p == i else ()), (d,)) for p, d in enumerate(data))


def test_sorted_prefix_translations_match_hand_formulas():
    e = golden.sorted_prefix_eqda()
    u = Universe([Y1, Y2])
    lists = parse("head ->* i & (forall y1,y2. head ->* y1 & y1 ->* y2 & y2 ->* i"
                  " => d(y1) <= d(y2))", u)
    arrays = parse("forall y1,y2. first(head) & head ->* y1 & y1 ->* y2 & y2 ->* i"
                   " => d(y1) <= d(y2)", u)
    s, a = evaluator(to_strand(e).formula), evaluator(to_apf(e).formula)
    ls, ar, acc = evaluator(lists), evaluator(arrays), Acceptor(e)
    for w in raw_list_words(5, range(4)):
        assert s(w) == ls(w) == acc(w)
        assert a(w) == ar(w)
