"""Letters, the four word kinds, and the encoding of program configurations.

A configuration is laid out as one data word: the ``nil`` block (carrying all
null pointers), one singleton cell per scalar data variable, then each
structure in declaration order.  Arrays are framed by a ``nil_le_zero`` block
for negative indices and a ``nil_geq_size`` block for indices past the end.
Data at the auxiliary blocks is fixed to zero.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, NamedTuple, Sequence

NIL = "nil"
NIL_LE_ZERO = "nil_le_zero"
NIL_GEQ_SIZE = "nil_geq_size"
AUX_PREFIXES = (NIL_LE_ZERO, NIL_GEQ_SIZE)


def is_aux(name: str) -> bool:
    return name == NIL or name.startswith(AUX_PREFIXES)


class MalformedConfig(ValueError):
    pass


class WordTooShort(ValueError):
    pass


@dataclass(frozen=True, repr=False)
class Letter:
    """A symbolic letter: the pointers at a position and the universal variable (or None)."""

    pointers: frozenset[str] = frozenset()
    var: str | None = None

    @property
    def is_blank(self) -> bool:
        return not self.pointers and self.var is None

    def key(self) -> tuple:
        return (len(self.pointers), tuple(sorted(self.pointers)), self.var or "")

    def __lt__(self, other: "Letter") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        ptr = "{" + ",".join(sorted(self.pointers)) + "}" if self.pointers else "b"
        return f"({ptr},{self.var or '-'})"

    __repr__ = __str__


BLANK = Letter()

_LETTER_RE = re.compile(r"^\(\s*(b|\{[^}]*\})\s*,\s*(-|\w+)\s*\)$")


def letter(pointers: Iterable[str] | str = (), var: str | None = None) -> Letter:
    if isinstance(pointers, str):
        pointers = (pointers,)
    return Letter(frozenset(pointers), var)


def parse_letter(text: str) -> Letter:
    m = _LETTER_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad letter: {text!r}")
    ptr, var = m.groups()
    names = [] if ptr == "b" else [p.strip() for p in ptr[1:-1].split(",") if p.strip()]
    return Letter(frozenset(names), None if var == "-" else var)


def parse_word(text: str) -> tuple[Letter, ...]:
    return tuple(parse_letter(t) for t in re.findall(r"\([^()]*\)", text))


def word_str(word: Sequence[Letter]) -> str:
    return "".join(map(str, word)) or "ε"


SymbolicWord = tuple  # tuple[Letter, ...]


class DataCell(NamedTuple):
    pointers: frozenset[str]
    data: tuple[int, ...]


class ValCell(NamedTuple):
    pointers: frozenset[str]
    data: tuple[int, ...]
    var: str | None


DataWord = tuple  # tuple[DataCell, ...]
ValuationWord = tuple  # tuple[ValCell, ...]


@dataclass(frozen=True)
class FormulaWord:
    word: tuple[Letter, ...]
    formula: object  # lattice.DataFormula


def symbolic(v: Sequence[ValCell]) -> tuple[Letter, ...]:
    return tuple(Letter(c.pointers, c.var) for c in v)


def is_valid(word: Sequence[Letter], pointers: Iterable[str], variables: Iterable[str]) -> bool:
    """Every pointer and every universal variable occurs exactly once."""
    seen_p: list[str] = []
    seen_y: list[str] = []
    for a in word:
        seen_p.extend(a.pointers)
        if a.var is not None:
            seen_y.append(a.var)
    return sorted(seen_p) == sorted(set(pointers)) and sorted(seen_y) == sorted(set(variables))


def valuations(w: Sequence[DataCell], variables: Sequence[str]) -> Iterator[tuple[ValCell, ...]]:
    """All valuation words extending ``w`` by an injective placement of ``variables``."""
    n, k = len(w), len(variables)
    if n < k:
        raise WordTooShort(f"word of length {n} cannot host {k} universal variables")
    for positions in itertools.permutations(range(n), k):
        tags: list[str | None] = [None] * n
        for y, pos in zip(variables, positions):
            tags[pos] = y
        yield tuple(ValCell(c.pointers, c.data, t) for c, t in zip(w, tags))


def is_canonical(word: Sequence, variables: Sequence[str], blocked: Iterable[str] = ()) -> bool:
    """Universal variables appear in declared order and never on an auxiliary or blocked cell.

    ``word`` may hold letters or valuation cells.  Placements that break this
    rule carry no information beyond their canonical twins: swapping variable
    names maps one onto the other, and auxiliary cells hold no program data.
    """
    blocked = set(blocked)
    order = {y: i for i, y in enumerate(variables)}
    last = -1
    for x in word:
        if x.var is None:
            continue
        if any(is_aux(p) or p in blocked for p in x.pointers):
            return False
        i = order.get(x.var, -1)
        if i <= last:
            return False
        last = i
    return True


def canonical_valuations(w: Sequence[DataCell], variables: Sequence[str],
                         blocked: Iterable[str] = ()) -> Iterator[tuple[ValCell, ...]]:
    """The valuations of ``w`` accepted by :func:`is_canonical`, in position order."""
    blocked = set(blocked)
    slots = [i for i, c in enumerate(w)
             if not any(is_aux(p) or p in blocked for p in c.pointers)]
    for positions in itertools.combinations(slots, len(variables)):
        tags: list[str | None] = [None] * len(w)
        for y, pos in zip(variables, positions):
            tags[pos] = y
        yield tuple(ValCell(c.pointers, c.data, t) for c, t in zip(w, tags))


@dataclass(frozen=True)
class Frame:
    """The fixed layout of encoded words for one set of declarations.

    The layout is the ``nil`` cell, one cell per scalar, then each structure's
    cells, with arrays framed by their markers.  Consecutive lists are not
    separated, so their cells form one run.  :meth:`step` tracks the set of
    layout positions a prefix can be in.
    """

    scalars: tuple[str, ...] = ()
    kinds: tuple[str, ...] = ()

    @classmethod
    def of(cls, c: "ProgramConfig") -> "Frame":
        return cls(tuple(s for s, _ in c.scalars), tuple(s.kind for s in c.structures))

    @property
    def items(self) -> tuple[str | None, ...]:
        """Marker names for singleton cells, None for a run of structure cells."""
        out: list[str | None] = [NIL, *self.scalars]
        arrays = 0
        for k in self.kinds:
            if k == "array":
                suffix = "" if arrays == 0 else f"_{arrays}"
                arrays += 1
                out += [NIL_LE_ZERO + suffix, None, NIL_GEQ_SIZE + suffix]
            elif out[-1] is not None:
                out.append(None)
        return tuple(out)

    @property
    def marks(self) -> frozenset[str]:
        return frozenset(m for m in self.items if m is not None)

    def _close(self, states: set[int]) -> frozenset[int]:
        items = self.items
        todo = list(states)
        while todo:
            i = todo.pop()
            if i < len(items) and items[i] is None and i + 1 not in states:
                states.add(i + 1)
                todo.append(i + 1)
        return frozenset(states)

    def start(self) -> frozenset[int]:
        return self._close({0})

    def step(self, state: frozenset[int], x) -> frozenset[int] | None:
        hit = [p for p in x.pointers if p in self.marks]
        if len(hit) > 1:
            return None
        mark = hit[0] if hit else None
        items = self.items
        nxt = set()
        for i in state:
            if i >= len(items):
                continue
            if items[i] is None and mark is None:
                nxt.add(i)
            elif items[i] is not None and items[i] == mark:
                nxt.add(i + 1)
        return self._close(nxt) if nxt else None

    def done(self, state: frozenset[int]) -> bool:
        return len(self.items) in state


# -- program configurations ---------------------------------------------------

@dataclass(frozen=True)
class Structure:
    kind: str  # "list" or "array"
    cells: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in ("list", "array"):
            raise MalformedConfig(f"unknown structure kind {self.kind!r}")

    @classmethod
    def of(cls, kind: str, cells: Iterable) -> "Structure":
        return cls(kind, tuple(tuple(c) if isinstance(c, (tuple, list)) else (c,) for c in cells))


@dataclass(frozen=True)
class ProgramConfig:
    """A loop-head snapshot: pointer bindings, scalar values and linear structures.

    ``bindings`` maps each pointer to ``(structure index, position)`` or None
    (null).  Array positions outside ``[0, size)`` are legal.
    """

    pointers: tuple[str, ...] = ()
    scalars: tuple[tuple[str, int], ...] = ()
    structures: tuple[Structure, ...] = ()
    bindings: tuple[tuple[str, tuple[int, int] | None], ...] = field(default=())

    @classmethod
    def make(cls, pointers: Sequence[str] = (), scalars: Mapping[str, int] | None = None,
             structures: Sequence[Structure] = (),
             bindings: Mapping[str, tuple[int, int] | None] | None = None) -> "ProgramConfig":
        scalars = dict(scalars or {})
        bindings = dict(bindings or {})
        return cls(tuple(pointers), tuple(scalars.items()), tuple(structures),
                   tuple((p, bindings.get(p)) for p in pointers))

    @property
    def arity(self) -> int:
        return max((len(c) for s in self.structures for c in s.cells), default=1)

    def binding(self, p: str) -> tuple[int, int] | None:
        return dict(self.bindings)[p]


def aux_names(c: ProgramConfig) -> list[str]:
    names = [NIL]
    arrays = [i for i, s in enumerate(c.structures) if s.kind == "array"]
    for n, _ in enumerate(arrays):
        suffix = "" if n == 0 else f"_{n}"
        names += [NIL_LE_ZERO + suffix, NIL_GEQ_SIZE + suffix]
    return names


def encode_config(c: ProgramConfig) -> tuple[DataCell, ...]:
    arity = c.arity
    zero = (0,) * arity
    bound = dict(c.bindings)
    if set(bound) != set(c.pointers):
        raise MalformedConfig("every declared pointer needs a binding entry")
    names = list(c.pointers) + [s for s, _ in c.scalars]
    if len(set(names)) != len(names) or any(is_aux(n) for n in names):
        raise MalformedConfig("pointer/scalar names must be distinct and not auxiliary")

    at: dict[tuple[int, int], set[str]] = {}
    nulls = {NIL}
    low: dict[int, set[str]] = {}
    high: dict[int, set[str]] = {}
    for p in c.pointers:
        b = bound[p]
        if b is None:
            nulls.add(p)
            continue
        try:
            si, pos = b
        except (TypeError, ValueError):
            raise MalformedConfig(f"pointer {p} has a malformed binding {b!r}") from None
        if not 0 <= si < len(c.structures):
            raise MalformedConfig(f"pointer {p} bound to missing structure {si}")
        s = c.structures[si]
        if 0 <= pos < len(s.cells):
            at.setdefault((si, pos), set()).add(p)
        elif s.kind == "array" and pos < 0:
            low.setdefault(si, set()).add(p)
        elif s.kind == "array":
            high.setdefault(si, set()).add(p)
        else:
            raise MalformedConfig(f"pointer {p} dangles outside its list")

    word = [DataCell(frozenset(nulls), zero)]
    for name, value in c.scalars:
        word.append(DataCell(frozenset([name]), (value,) + (0,) * (arity - 1)))
    arrays_seen = 0
    for si, s in enumerate(c.structures):
        for cell in s.cells:
            if len(cell) != arity:
                raise MalformedConfig("all cells must share one data arity")
        if s.kind == "array":
            suffix = "" if arrays_seen == 0 else f"_{arrays_seen}"
            arrays_seen += 1
            word.append(DataCell(frozenset({NIL_LE_ZERO + suffix} | low.get(si, set())), zero))
        for pos, cell in enumerate(s.cells):
            word.append(DataCell(frozenset(at.get((si, pos), set())), tuple(cell)))
        if s.kind == "array":
            word.append(DataCell(frozenset({NIL_GEQ_SIZE + suffix} | high.get(si, set())), zero))
    return tuple(word)


def data_word_str(w: Sequence[DataCell]) -> str:
    parts = []
    for c in w:
        ptr = "{" + ",".join(sorted(c.pointers)) + "}" if c.pointers else "b"
        d = c.data[0] if len(c.data) == 1 else c.data
        parts.append(f"({ptr},{d})")
    return "".join(parts)


# -- trace files ---------------------------------------------------------------
#
# One JSON object per line:
#   {"pointers": ["head", "cur"], "scalars": {"k": 4},
#    "structures": [{"kind": "list", "cells": [3, 5]}],
#    "bindings": {"head": [0, 0], "cur": null}}
# Cells are integers for arity 1 and integer lists otherwise.

def config_to_json(c: ProgramConfig) -> dict:
    return {
        "pointers": list(c.pointers),
        "scalars": dict(c.scalars),
        "structures": [
            {"kind": s.kind,
             "cells": [cell[0] if len(cell) == 1 else list(cell) for cell in s.cells]}
            for s in c.structures
        ],
        "bindings": {p: (list(b) if b is not None else None) for p, b in c.bindings},
    }


def config_from_json(obj: Mapping) -> ProgramConfig:
    try:
        structures = [Structure.of(s["kind"], s["cells"]) for s in obj.get("structures", [])]
        bindings = {p: (tuple(b) if b is not None else None)
                    for p, b in obj.get("bindings", {}).items()}
        return ProgramConfig.make(obj.get("pointers", []), obj.get("scalars", {}),
                                  structures, bindings)
    except (KeyError, TypeError) as exc:
        raise MalformedConfig(f"bad trace record: {exc}") from None


def write_traces(configs: Iterable[ProgramConfig], fh: IO[str]) -> int:
    n = 0
    for c in configs:
        fh.write(json.dumps(config_to_json(c), sort_keys=True) + "\n")
        n += 1
    return n


def read_traces(fh: IO[str]) -> list[ProgramConfig]:
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(config_from_json(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise MalformedConfig(f"line {lineno}: {exc}") from None
    return out
