"""Fixture programs: small reference implementations that record loop-head configurations.

Each generator enumerates every input up to a length and data bound, runs the
loop, and yields the configuration at every evaluation of the loop condition
(including the final, failing one).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .checker import ModelBound
from .lattice import Register, Scalar, Universe, lit, saturate
from .logic import DataAtom, Forall, Formula, Implies, Not, PtrNull, Reach, conj, disj
from .teacher import default_variables
from .words import Frame, ProgramConfig, Structure, encode_config


@dataclass(frozen=True)
class Bounds:
    max_len: int = 4
    data: tuple[int, int] = (0, 3)
    min_len: int = 0

    @property
    def values(self) -> range:
        return range(self.data[0], self.data[1] + 1)


@dataclass
class Fixture:
    name: str
    pointers: tuple[str, ...]
    scalars: tuple[str, ...]
    structures: tuple[str, ...]
    n_vars: int
    generator: Callable[[Bounds], Iterator[ProgramConfig]]
    reference_states: int
    reference_elastify: bool
    arity: int = 1
    train: Bounds = field(default_factory=Bounds)
    test: Bounds = field(default_factory=lambda: Bounds(6, (0, 4)))
    pad: bool = False  # universal variables may also sit on scalar cells
    check: Bounds | None = None  # model bounds for translation checks; defaults to train
    # optional compact form of the traces as product sets (see ``Family``)
    families: Callable[[Bounds], Iterator["Family"]] | None = None

    @property
    def variables(self) -> tuple[str, ...]:
        return default_variables(self.n_vars)

    @property
    def blocked(self) -> tuple[str, ...]:
        """Cells universal variables may not occupy besides the auxiliary ones."""
        return () if self.pad else self.scalars

    @property
    def check_bounds(self) -> Bounds:
        return self.check or self.train

    @property
    def frame(self) -> Frame:
        return Frame(self.scalars, self.structures)

    def universe(self) -> Universe:
        return Universe.standard(self.variables, self.scalars, self.arity)

    def traces(self, bounds: Bounds | None = None) -> list[ProgramConfig]:
        seen: dict[ProgramConfig, None] = {}
        for c in self.generator(bounds or self.train):
            seen.setdefault(c, None)
        return list(seen)


_MARK = 10 ** 6


@dataclass(frozen=True)
class Family:
    """Configurations sharing pointers and scalars whose cell ``j`` ranges over ``cells[j]``.

    Only for a single structure.
    """

    kind: str
    pointers: tuple[tuple[str, int], ...]
    scalars: tuple[tuple[str, int], ...]
    cells: tuple[tuple[tuple[int, ...], ...], ...]

    def members(self) -> Iterator[ProgramConfig]:
        for cells in itertools.product(*self.cells):
            yield self._config(cells)

    def _config(self, cells) -> ProgramConfig:
        return ProgramConfig.make([p for p, _ in self.pointers], dict(self.scalars),
                                  [Structure.of(self.kind, list(cells))],
                                  {p: (0, i) for p, i in self.pointers})

    def word(self) -> tuple[tuple, list]:
        """A representative encoded word and, per position, the data it may carry."""
        arity = len(self.cells[0][0]) if self.cells else 1
        w = encode_config(self._config([(_MARK + j,) * arity for j in range(len(self.cells))]))
        doms = [self.cells[c.data[0] - _MARK] if c.data and c.data[0] >= _MARK else (c.data,)
                for c in w]
        return w, doms


def _arrays(b: Bounds, min_len: int = 0) -> Iterator[list[int]]:
    for n in range(max(min_len, b.min_len), b.max_len + 1):
        for cells in itertools.product(b.values, repeat=n):
            yield list(cells)


def _sorted_lists(b: Bounds, min_len: int = 1) -> Iterator[list[int]]:
    for cells in _arrays(b, min_len):
        if cells == sorted(cells):
            yield cells


def _array_cfg(pointers: dict, scalars: dict, cells) -> ProgramConfig:
    return ProgramConfig.make(list(pointers), scalars, [Structure.of("array", cells)],
                              {p: (0, i) for p, i in pointers.items()})


# -- arrays -------------------------------------------------------------------


def array_find(b: Bounds) -> Iterator[ProgramConfig]:
    for a in _arrays(b):
        for k in b.values:
            i = 0
            while True:
                yield _array_cfg({"i": i}, {"k": k}, a)
                if not (i < len(a) and a[i] != k):
                    break
                i += 1


def array_copy(b: Bounds) -> Iterator[ProgramConfig]:
    for a in _arrays(b):
        for dst in itertools.product(b.values, repeat=len(a)):
            dst = list(dst)
            i = 0
            while True:
                yield _array_cfg({"i": i}, {}, list(zip(a, dst)))
                if i >= len(a):
                    break
                dst[i] = a[i]
                i += 1


def array_copy_families(b: Bounds) -> Iterator[Family]:
    same = tuple((v, v) for v in b.values)
    pairs = tuple(itertools.product(b.values, repeat=2))
    for n in range(b.min_len, b.max_len + 1):
        for i in range(n + 1):
            yield Family("array", (("i", i),), (), (same,) * i + (pairs,) * (n - i))


def ins_sort_inner(b: Bounds) -> Iterator[ProgramConfig]:
    for a in _arrays(b):
        a = list(a)
        for i in range(1, len(a)):
            key = a[i]
            j = i - 1
            while True:
                yield _array_cfg({"i": i, "j": j}, {"key": key}, a)
                if not (j >= 0 and a[j] > key):
                    break
                a[j + 1] = a[j]
                j -= 1
            a[j + 1] = key


def sel_sort_inner(b: Bounds) -> Iterator[ProgramConfig]:
    for a in _arrays(b):
        a = list(a)
        for i in range(len(a) - 1):
            m = i
            j = i + 1
            while True:
                yield _array_cfg({"i": i, "j": j, "min": m}, {}, a)
                if j >= len(a):
                    break
                if a[j] < a[m]:
                    m = j
                j += 1
            a[i], a[m] = a[m], a[i]


# -- lists ----------------------------------------------------------------------


def _list_cfg(pointers: dict, scalars: dict, lists) -> ProgramConfig:
    return ProgramConfig.make(list(pointers), scalars, [Structure.of("list", c) for c in lists],
                              pointers)


def _at(i: int, n: int, s: int = 0):
    return (s, i) if i < n else None


def list_find(b: Bounds) -> Iterator[ProgramConfig]:
    for cells in _sorted_lists(b):
        for k in b.values:
            cur = 0
            while True:
                yield _list_cfg({"head": (0, 0), "cur": _at(cur, len(cells))}, {"k": k}, [cells])
                if not (cur < len(cells) and cells[cur] < k):
                    break
                cur += 1


def list_init(b: Bounds) -> Iterator[ProgramConfig]:
    for cells in _arrays(b, 1):
        for k in b.values:
            cells = list(cells)
            cur = 0
            while True:
                yield _list_cfg({"head": (0, 0), "cur": _at(cur, len(cells))}, {"k": k}, [cells])
                if cur >= len(cells):
                    break
                cells[cur] = k
                cur += 1


def list_max(b: Bounds) -> Iterator[ProgramConfig]:
    for cells in _arrays(b, 1):
        mx = cells[0]
        cur = 0
        while True:
            yield _list_cfg({"head": (0, 0), "cur": _at(cur, len(cells))}, {"max": mx}, [cells])
            if cur >= len(cells):
                break
            mx = max(mx, cells[cur])
            cur += 1


def list_reverse(b: Bounds) -> Iterator[ProgramConfig]:
    """In-place reversal of a sorted list: ``prev`` heads the reversed part, ``cur`` the rest."""
    for cells in _sorted_lists(b):
        done: list[int] = []
        rest = list(cells)
        while True:
            ptrs = {"prev": (0, 0) if done else None, "cur": (1, 0) if rest else None}
            yield _list_cfg(ptrs, {}, [list(done), list(rest)])
            if not rest:
                break
            done.insert(0, rest.pop(0))


def list_insert(b: Bounds) -> Iterator[ProgramConfig]:
    """Search phase of sorted insertion: ``prev`` trails ``cur``."""
    for cells in _sorted_lists(b):
        for k in b.values:
            prev, cur = None, 0
            while True:
                ptrs = {"head": (0, 0), "prev": None if prev is None else (0, prev),
                        "cur": _at(cur, len(cells))}
                yield _list_cfg(ptrs, {"k": k}, [cells])
                if not (cur < len(cells) and cells[cur] < k):
                    break
                prev, cur = cur, cur + 1


FIXTURES: dict[str, Fixture] = {f.name: f for f in [
    Fixture("array-find", ("i",), ("k",), ("array",), 1, array_find, 8, False),
    Fixture("array-copy", ("i",), (), ("array",), 1, array_copy, 10, False, arity=2,
            train=Bounds(3, (0, 2)), families=array_copy_families),
    Fixture("ins-sort-inner", ("i", "j"), ("key",), ("array",), 2, ins_sort_inner, 23, True),
    Fixture("sel-sort-inner", ("i", "j", "min"), (), ("array",), 2, sel_sort_inner, 40, True),
    Fixture("list-find", ("head", "cur"), ("k",), ("list",), 2, list_find, 15, True, pad=True),
    Fixture("list-init", ("head", "cur"), ("k",), ("list",), 1, list_init, 10, True),
    Fixture("list-max", ("head", "cur"), ("max",), ("list",), 1, list_max, 14, True),
    Fixture("list-reverse", ("prev", "cur"), (), ("list", "list"), 2, list_reverse, 18, False,
            check=Bounds(3, (0, 3))),
    Fixture("list-insert", ("head", "prev", "cur"), ("k",), ("list",), 2, list_insert, 20, False),
]}


# -- reference invariant ----------------------------------------------------------

Y1, Y2, K = Register("y1"), Register("y2"), Scalar("k")


def list_find_invariant() -> Formula:
    """head is not null, the list is sorted, and every cell before cur is below k."""
    u = Universe([Y1, Y2, K])
    le = DataAtom(saturate([lit(Y1, "<=", Y2)], u))
    lt = DataAtom(saturate([lit(Y1, "<", K)], u))
    return conj(
        Not(PtrNull("head")),
        Forall(("y1", "y2"), Implies(conj(Reach("head", "y1"), Reach("y1", "y2")), le)),
        disj(
            conj(PtrNull("cur"), Forall(("y1",), Implies(Reach("head", "y1"), lt))),
            conj(Reach("head", "cur"),
                 Forall(("y1",), Implies(conj(Reach("head", "y1"), Reach("y1", "cur", True)), lt))),
        ),
    )


def list_find_models(max_len: int = 4, data=(0, 3)):
    """One list (length >= 1) with head at its first cell; cur null or anywhere; any data."""
    b = ModelBound(structures=("list",), max_len=max_len, min_len=1, data=data,
                   pointers=("head", "cur"), scalars=("k",))
    from .checker import enumerate_models

    return (c for c in enumerate_models(b) if c.binding("head") == (0, 0))


def model_bound(f: Fixture, bounds: Bounds) -> ModelBound:
    homes = ()
    if f.name == "list-reverse":
        homes = (("prev", 0), ("cur", 1))
    return ModelBound(structures=f.structures, max_len=bounds.max_len, min_len=bounds.min_len,
                      data=bounds.data, pointers=f.pointers, scalars=f.scalars, arity=f.arity,
                      homes=homes)
