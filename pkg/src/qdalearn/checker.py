"""Bounded-model semantics for quantified formulas.

Formulas are interpreted over the positions of the encoded data word of a
configuration.  Names (pointers, scalars, ``nil`` and the array markers) denote
the position of the cell that carries them; universal variables range over
injective placements onto positions.  A quantified conjunct with more
variables than positions is vacuously true.

Structural subformulas depend only on where names sit, not on data, so their
values are cached per pointer skeleton.  This keeps exhaustive checks over
thousands of small models fast.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from . import lattice
from .lattice import Register
from .logic import (
    And, Const, DataAtom, First, FixedDist, Forall, Formula, Implies, Last, Not, Or, PtrEq,
    PtrNull, Reach, Succ, is_structural,
)
from .words import NIL, DataCell, ProgramConfig, Structure, encode_config


@dataclass(frozen=True)
class ModelBound:
    """Finite model space: structure kinds, length and data ranges, declared names.

    ``homes`` pins a pointer to one structure index; unpinned pointers may bind
    to any structure.  List pointers may be null; array pointers range over
    indices ``-1 .. len``.
    """

    structures: tuple[str, ...] = ()
    max_len: int = 0
    min_len: int = 0
    data: tuple[int, int] = (0, 0)
    pointers: tuple[str, ...] = ()
    scalars: tuple[str, ...] = ()
    arity: int = 1
    homes: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.max_len < 0 or self.min_len < 0 or self.arity < 1:
            raise ValueError("bounds must be non-negative")
        if self.data[0] > self.data[1]:
            raise ValueError("empty data range")

    @property
    def values(self) -> range:
        return range(self.data[0], self.data[1] + 1)


def _cells(b: ModelBound, n: int) -> Iterator[tuple]:
    vals = list(b.values)
    if b.arity == 1:
        yield from itertools.product(vals, repeat=n)
    else:
        yield from itertools.product(list(itertools.product(vals, repeat=b.arity)), repeat=n)


def _targets(b: ModelBound, p: str, lengths: Sequence[int]) -> list:
    homes = dict(b.homes)
    indices = [homes[p]] if p in homes else range(len(b.structures))
    out: list = []
    if any(b.structures[i] == "list" for i in indices):
        out.append(None)
    for i in indices:
        if b.structures[i] == "list":
            out += [(i, k) for k in range(lengths[i])]
        else:
            out += [(i, k) for k in range(-1, lengths[i] + 1)]
    return out


def enumerate_models(b: ModelBound) -> Iterator[ProgramConfig]:
    """Every well-formed configuration within ``b``, each exactly once."""
    lo = b.min_len
    for lengths in itertools.product(range(lo, b.max_len + 1), repeat=len(b.structures)):
        targets = [_targets(b, p, lengths) for p in b.pointers]
        if any(not t for t in targets):
            continue
        per_struct = [list(_cells(b, n)) for n in lengths]
        for contents in itertools.product(*per_struct):
            structs = [Structure.of(k, c) for k, c in zip(b.structures, contents)]
            for svals in itertools.product(b.values, repeat=len(b.scalars)):
                for binding in itertools.product(*targets):
                    yield ProgramConfig.make(b.pointers, dict(zip(b.scalars, svals)), structs,
                                             dict(zip(b.pointers, binding)))


# -- evaluation ------------------------------------------------------------------


def _word(c) -> tuple:
    return encode_config(c) if isinstance(c, ProgramConfig) else tuple(c)


def skeleton(word: Sequence[DataCell]) -> tuple:
    return tuple(cell.pointers for cell in word)


def _ground_positions(skel: tuple) -> dict[str, int]:
    pos = {}
    for i, names in enumerate(skel):
        for p in names:
            pos[p] = i
    return pos


def _pos(env: Mapping[str, int], name: str) -> int:
    try:
        return env[name]
    except KeyError:
        raise ValueError(f"name {name!r} does not occur in the model") from None


def _structural(f: Formula, env: Mapping[str, int], n: int) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, PtrEq):
        return _pos(env, f.x) == _pos(env, f.y)
    if isinstance(f, PtrNull):
        return NIL in env and _pos(env, f.x) == env[NIL]
    if isinstance(f, Reach):
        a, b = _pos(env, f.x), _pos(env, f.y)
        return a < b if f.strict else a <= b
    if isinstance(f, Succ):
        return _pos(env, f.y) == _pos(env, f.x) + 1
    if isinstance(f, FixedDist):
        base = 0 if f.pv is None else _pos(env, f.pv)
        return _pos(env, f.y) == base + f.c
    if isinstance(f, First):
        return _pos(env, f.x) == 0
    if isinstance(f, Last):
        return _pos(env, f.x) == n - 1
    raise TypeError(f"not a structural formula: {f!r}")


def _data(f: DataAtom, env: Mapping[str, int], word) -> bool:
    a = f.formula
    if a.literals is None:
        return False
    assignment = {}
    for t in a.terms():
        if isinstance(t, Register):
            assignment[t] = word[_pos(env, t.var)].data[t.comp]
        else:
            assignment[t] = word[_pos(env, t.name)].data[0]
    return lattice.evaluate(a, assignment)


def _injective(vars_: Sequence[str], n: int) -> Iterator[tuple[int, ...]]:
    return itertools.permutations(range(n), len(vars_))


def evaluate(f: Formula, env: Mapping[str, int], word) -> bool:
    """Plain recursive evaluation (no caching)."""
    n = len(word)
    if isinstance(f, And):
        return all(evaluate(p, env, word) for p in f.parts)
    if isinstance(f, Or):
        return any(evaluate(p, env, word) for p in f.parts)
    if isinstance(f, Not):
        return not evaluate(f.arg, env, word)
    if isinstance(f, Implies):
        return not evaluate(f.lhs, env, word) or evaluate(f.rhs, env, word)
    if isinstance(f, Forall):
        for ps in _injective(f.vars, n):
            inner = dict(env)
            inner.update(zip(f.vars, ps))
            if not evaluate(f.body, inner, word):
                return False
        return True
    if isinstance(f, DataAtom):
        return _data(f, env, word)
    return _structural(f, env, n)


class Evaluator:
    """Evaluates one formula on many models, caching structural work per skeleton."""

    def __init__(self, f: Formula):
        self.formula = f
        self.conjuncts = list(f.parts) if isinstance(f, And) else [f]
        self.structural = [is_structural(c) for c in self.conjuncts]
        self._cache: dict = {}

    def _guarded(self, i: int, c: Forall, skel: tuple, n: int):
        key = (i, skel)
        hit = self._cache.get(key)
        if hit is None:
            env = _ground_positions(skel)
            hit = []
            g = c.body.lhs
            for ps in _injective(c.vars, n):
                inner = dict(env)
                inner.update(zip(c.vars, ps))
                if evaluate(g, inner, skel):
                    hit.append(inner)
            self._cache[key] = hit
        return hit

    def __call__(self, model) -> bool:
        word = _word(model)
        skel = skeleton(word)
        n = len(word)
        for i, c in enumerate(self.conjuncts):
            if self.structural[i]:
                key = (i, skel)
                v = self._cache.get(key)
                if v is None:
                    v = evaluate(c, _ground_positions(skel), skel)
                    self._cache[key] = v
                if not v:
                    return False
            elif isinstance(c, Forall) and isinstance(c.body, Implies) and is_structural(c.body.lhs):
                for env in self._guarded(i, c, skel, n):
                    if not evaluate(c.body.rhs, env, word):
                        return False
            elif not evaluate(c, _ground_positions(skel), word):
                return False
        return True


_EVALUATORS: dict[int, tuple[Formula, Evaluator]] = {}


def evaluator(f: Formula) -> Evaluator:
    hit = _EVALUATORS.get(id(f))
    if hit is None or hit[0] is not f:
        if len(_EVALUATORS) > 64:
            _EVALUATORS.clear()
        hit = (f, Evaluator(f))
        _EVALUATORS[id(f)] = hit
    return hit[1]


def holds(f: Formula, model) -> bool:
    """Does ``f`` hold on a configuration (or an already encoded data word)?"""
    return evaluator(f)(model)


def first_disagreement(p: Callable, q: Callable, models: Iterable):
    for m in models:
        if p(m) != q(m):
            return m
    return None


def equiv_on_models(f1: Formula, f2: Formula, b: ModelBound | Iterable, keep=None):
    """None if ``f1`` and ``f2`` agree on every model, else a witness model."""
    models = enumerate_models(b) if isinstance(b, ModelBound) else b
    if keep is not None:
        models = (m for m in models if keep(m))
    return first_disagreement(evaluator(f1), evaluator(f2), models)
