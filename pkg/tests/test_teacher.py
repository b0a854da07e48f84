import itertools

from hypothesis import given, settings, strategies as st

from qdalearn.automaton import Qda
from qdalearn.learner import learn
from qdalearn.lattice import BOTTOM, TOP, Register, Universe, leq, lit, saturate
from qdalearn.teacher import (
    SampleTeacher, build_samples, equivalence, learner_alphabet, membership,
)
from qdalearn.words import BLANK, NIL, ProgramConfig, Structure, letter, parse_word

Y1, Y2 = Register("y1"), Register("y2")
U = Universe([Y1, Y2])
YS = ("y1", "y2")


def lst(cells, head=0):
    return ProgramConfig.make(["head"], {}, [Structure.of("list", cells)], {"head": (0, head)})


KEY = (letter(NIL), letter("head", "y1"), letter((), "y2"))


def test_build_samples_join_rule():
    s = build_samples([lst([1, 2])], U, YS)
    assert s[KEY] == saturate([lit(Y1, "<", Y2)], U)
    s = build_samples([lst([1, 2]), lst([2, 2])], U, YS)
    assert s[KEY] == saturate([lit(Y1, "<=", Y2)], U)
    assert s.counts[KEY] == 2
    assert len(build_samples([], U, YS)) == 0


def test_build_samples_nil_cell_is_a_position():
    # three positions (nil, head, b) give 3*2 valuations
    s = build_samples([lst([1, 2])], U, YS)
    assert len(s) == 6
    assert all(f != BOTTOM for f in s.formulas.values())


def test_membership():
    s = build_samples([lst([1, 2])], U, YS)
    assert membership(s, KEY) == s[KEY]
    assert membership(s, (letter(NIL), letter("head", "y1"), BLANK)) == BOTTOM
    assert membership(s, (letter(NIL), letter("head"), letter((), "y2"))) == BOTTOM


def const_qda(f):
    return Qda(0, {}, {0: f}, bottom=f)


def test_equivalence_examples():
    s = build_samples([lst([1, 2])], U, YS)
    top = Qda(0, {(0, x): 0 for x in learner_alphabet(s, YS)}, {0: TOP})
    assert equivalence(s, top) is None
    w = equivalence(s, Qda(0, {}, {0: BOTTOM}))
    assert w == s.keys_shortlex()[0]


def test_learned_hypothesis_contains_samples():
    configs = [lst([a, b]) for a, b in itertools.product(range(3), repeat=2) if a <= b]
    s = build_samples(configs, U, YS)
    t = SampleTeacher(s)
    h = learn(t, learner_alphabet(s, YS))
    assert equivalence(s, h) is None
    for w, f in s.formulas.items():
        assert leq(f, h.output_of(w))


def test_learner_alphabet_adds_blank_and_plain_variables():
    s = build_samples([lst([1, 2])], U, YS)
    alph = learner_alphabet(s, YS)
    assert BLANK in alph and letter((), "y1") in alph and letter((), "y2") in alph
    assert parse_word("({head},y1)")[0] in alph


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, 3), min_size=1, max_size=3), min_size=1, max_size=4),
       st.lists(st.integers(0, 3), min_size=1, max_size=3))
def test_adding_configs_is_monotone(cells_list, extra):
    old = build_samples([lst(c) for c in cells_list], U, YS)
    new = build_samples([lst(c) for c in cells_list + [extra]], U, YS)
    for w, f in old.formulas.items():
        assert leq(f, new[w])
