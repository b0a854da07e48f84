import io
import itertools
from math import perm

import pytest
from hypothesis import given, strategies as st

from qdalearn.words import (
    BLANK, NIL, DataCell, MalformedConfig, ProgramConfig, Structure, WordTooShort,
    data_word_str, encode_config, is_valid, letter, parse_letter, parse_word, read_traces,
    symbolic, valuations, word_str, write_traces,
)


def cells(spec):
    return tuple(DataCell(frozenset(p), (d,)) for p, d in spec)


def test_encode_list_with_null_pointer():
    c = ProgramConfig.make(["head", "cur"], {"k": 4}, [Structure.of("list", [3, 5])],
                           {"head": (0, 0), "cur": None})
    assert encode_config(c) == cells([({NIL, "cur"}, 0), ({"k"}, 4), ({"head"}, 3), ((), 5)])
    assert data_word_str(encode_config(c)) == "({cur,nil},0)({k},4)({head},3)(b,5)"


def test_encode_array_bounds():
    c = ProgramConfig.make(["i"], {}, [Structure.of("array", [7, 8])], {"i": (0, 2)})
    assert encode_config(c) == cells([({NIL}, 0), ({"nil_le_zero"}, 0), ((), 7), ((), 8),
                                      ({"nil_geq_size", "i"}, 0)])
    c = ProgramConfig.make(["i"], {}, [Structure.of("array", [7])], {"i": (0, -1)})
    assert encode_config(c)[1] == DataCell(frozenset({"nil_le_zero", "i"}), (0,))


def test_encode_second_array_suffixes():
    c = ProgramConfig.make([], {}, [Structure.of("array", []), Structure.of("array", [1])])
    names = [set(x.pointers) for x in encode_config(c)]
    assert names == [{NIL}, {"nil_le_zero"}, {"nil_geq_size"},
                     {"nil_le_zero_1"}, set(), {"nil_geq_size_1"}]


def test_encode_tuple_data():
    c = ProgramConfig.make(["i"], {}, [Structure.of("array", [(1, 2)])], {"i": (0, 0)})
    w = encode_config(c)
    assert w[0].data == (0, 0) and w[2].data == (1, 2)


def test_encode_rejects_malformed():
    lst = Structure.of("list", [1])
    with pytest.raises(MalformedConfig):
        encode_config(ProgramConfig.make(["p"], {}, [lst], {"p": (0, 3)}))
    with pytest.raises(MalformedConfig):
        encode_config(ProgramConfig.make(["p"], {}, [lst], {"p": (2, 0)}))
    with pytest.raises(MalformedConfig):
        encode_config(ProgramConfig.make(["nil"], {}, [lst], {"nil": None}))
    with pytest.raises(MalformedConfig):
        Structure.of("tree", [])


def test_letter_text_roundtrip():
    for x in [BLANK, letter("head"), letter(["head", "i"], "y2"), letter((), "y1")]:
        assert parse_letter(str(x)) == x
    w = parse_word("({head},-)(b,y1)(b,-)")
    assert w == (letter("head"), letter((), "y1"), BLANK)
    assert word_str(w) == "({head},-)(b,y1)(b,-)"
    with pytest.raises(ValueError):
        parse_letter("head")


def test_is_valid():
    pv, ys = ["head", "i"], ["y1"]
    assert is_valid(parse_word("({head},y1)(b,-)({i},-)"), pv, ys)
    assert not is_valid(parse_word("({head},y1)({head},-)({i},-)"), pv, ys)
    assert not is_valid(parse_word("({head},-)({i},-)"), pv, ys)
    assert not is_valid(parse_word("({head},y1)(b,y1)({i},-)"), pv, ys)


@given(st.integers(0, 5), st.integers(0, 3))
def test_valuation_count_is_falling_factorial(n, k):
    w = cells([((), i) for i in range(n)])
    ys = [f"y{i + 1}" for i in range(k)]
    if n < k:
        with pytest.raises(WordTooShort):
            list(valuations(w, ys))
        return
    vs = list(valuations(w, ys))
    assert len(vs) == perm(n, k)
    # brute force: every injective tag assignment appears exactly once
    want = set()
    for tags in itertools.product([None, *ys], repeat=n):
        if sorted(t for t in tags if t) == sorted(ys):
            want.add(tags)
    assert {tuple(c.var for c in v) for v in vs} == want
    assert all(is_valid(symbolic(v), [], ys) for v in vs)


def test_trace_file_roundtrip():
    cs = [
        ProgramConfig.make(["head", "cur"], {"k": 4}, [Structure.of("list", [3, 5])],
                           {"head": (0, 0), "cur": None}),
        ProgramConfig.make(["i"], {}, [Structure.of("array", [(1, 2), (3, 4)])], {"i": (0, 1)}),
    ]
    buf = io.StringIO()
    assert write_traces(cs, buf) == 2
    buf.seek(0)
    assert read_traces(buf) == cs


def test_trace_file_errors():
    with pytest.raises(MalformedConfig):
        read_traces(io.StringIO("{not json\n"))
    with pytest.raises(MalformedConfig):
        read_traces(io.StringIO('{"structures": [{"cells": [1]}]}\n'))
