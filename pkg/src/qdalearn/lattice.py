"""Cartesian lattice of order constraints over data terms.

A :class:`DataFormula` is either ``BOTTOM`` (false) or a *saturated* set of
order literals: every literal over the atom universe that is implied by the
set is a member of it.  Saturation makes the representation canonical, so
``leq`` is literal-set inclusion and ``join`` is intersection.

Saturation is computed semantically: the models of a conjunction of order
literals over ``n`` terms are determined, up to order isomorphism, by the weak
orderings of those terms.  Enumerating the weak orderings (13 for three terms,
75 for four) gives exact closure, including the cases where local
path-consistency rules are incomplete in the presence of ``!=``.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Union


class UndefinedTerm(KeyError):
    """Raised when a formula mentions a term the assignment does not bind."""


@dataclass(frozen=True)
class Register:
    """Data stored at the cell of universal variable ``var`` (tuple component ``comp``)."""

    var: str
    comp: int = 0

    def __str__(self) -> str:
        return f"d({self.var})" if self.comp == 0 else f"d{self.comp}({self.var})"


@dataclass(frozen=True)
class Scalar:
    """A scalar data variable of the program, e.g. the search key ``k``."""

    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Register, Scalar]


def term_key(t: Term) -> tuple:
    if isinstance(t, Register):
        return (0, t.var, t.comp)
    return (1, t.name, 0)


class Rel(enum.Enum):
    LT = "<"
    LEQ = "<="
    EQ = "="
    NEQ = "!="


@dataclass(frozen=True)
class Literal:
    lhs: Term
    rel: Rel
    rhs: Term

    def holds(self, a: int, b: int) -> bool:
        if self.rel is Rel.LT:
            return a < b
        if self.rel is Rel.LEQ:
            return a <= b
        if self.rel is Rel.EQ:
            return a == b
        return a != b

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel.value} {self.rhs}"


def lit(lhs: Term, rel: Rel | str, rhs: Term) -> Literal:
    """Build a literal, normalising symmetric relations and ``>``/``>=``."""
    if isinstance(rel, str):
        if rel in (">", ">="):
            lhs, rhs = rhs, lhs
            rel = "<" if rel == ">" else "<="
        rel = Rel(rel)
    if lhs == rhs:
        raise ValueError(f"literal relates {lhs} to itself")
    if rel in (Rel.EQ, Rel.NEQ) and term_key(rhs) < term_key(lhs):
        lhs, rhs = rhs, lhs
    return Literal(lhs, rel, rhs)


def _pair(a: Term, b: Term) -> tuple[Term, Term]:
    return (a, b) if term_key(a) <= term_key(b) else (b, a)


class Universe:
    """The atom universe: a set of term pairs that literals may relate."""

    def __init__(self, terms: Iterable[Term], pairs: Iterable[tuple[Term, Term]] | None = None):
        self.terms: tuple[Term, ...] = tuple(sorted(set(terms), key=term_key))
        if pairs is None:
            pairs = itertools.combinations(self.terms, 2)
        self.pairs: frozenset[tuple[Term, Term]] = frozenset(_pair(a, b) for a, b in pairs)
        for a, b in self.pairs:
            if a not in self.terms or b not in self.terms:
                raise ValueError(f"pair ({a}, {b}) uses a term outside the universe")
        lits = []
        for a, b in sorted(self.pairs, key=lambda p: (term_key(p[0]), term_key(p[1]))):
            lits += [lit(a, Rel.LT, b), lit(b, Rel.LT, a), lit(a, Rel.LEQ, b),
                     lit(b, Rel.LEQ, a), lit(a, Rel.EQ, b), lit(a, Rel.NEQ, b)]
        self.literals: tuple[Literal, ...] = tuple(lits)

    @classmethod
    def standard(cls, variables: Iterable[str], scalars: Iterable[str] = (), arity: int = 1) -> "Universe":
        """All pairs over ``d_j(y)`` for every variable and component, plus scalars."""
        terms: list[Term] = [Register(y, j) for y in variables for j in range(arity)]
        terms += [Scalar(s) for s in scalars]
        return cls(terms)

    def _key(self) -> tuple:
        return (self.terms, self.pairs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Universe) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"Universe({', '.join(map(str, self.terms))}; {len(self.pairs)} pairs)"


@dataclass(frozen=True)
class DataFormula:
    """A lattice element; ``literals is None`` encodes bottom (false)."""

    literals: frozenset[Literal] | None

    @property
    def is_bottom(self) -> bool:
        return self.literals is None

    @property
    def is_top(self) -> bool:
        return self.literals is not None and not self.literals

    def terms(self) -> set[Term]:
        out: set[Term] = set()
        for l in self.literals or ():
            out.update((l.lhs, l.rhs))
        return out

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"DataFormula({render(self)!r})"


BOTTOM = DataFormula(None)
TOP = DataFormula(frozenset())


@lru_cache(maxsize=None)
def _weak_orders(n: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for ranks in itertools.product(range(n), repeat=n):
        if set(ranks) == set(range(max(ranks) + 1)):
            out.append(ranks)
    return tuple(out)


@lru_cache(maxsize=200_000)
def _saturate(lits: frozenset[Literal], universe: Universe) -> DataFormula:
    terms = list(universe.terms)
    for l in lits:
        for t in (l.lhs, l.rhs):
            if t not in terms:
                raise ValueError(f"term {t} is outside the atom universe")
    idx = {t: i for i, t in enumerate(terms)}
    checks = [(idx[l.lhs], idx[l.rhs], l) for l in lits]
    models = [r for r in _weak_orders(len(terms))
              if all(l.holds(r[i], r[j]) for i, j, l in checks)]
    if not models:
        return BOTTOM
    closed = frozenset(
        l for l in universe.literals
        if all(l.holds(r[idx[l.lhs]], r[idx[l.rhs]]) for r in models)
    )
    return DataFormula(closed)


def saturate(literals: Iterable[Literal], universe: Universe | None = None) -> DataFormula:
    """Closure of ``literals`` under implication, or ``BOTTOM`` if unsatisfiable.

    Without an explicit universe, the universe is every pair over the terms
    the literals mention.
    """
    lits = frozenset(literals)
    if universe is None:
        terms = {t for l in lits for t in (l.lhs, l.rhs)}
        universe = Universe(terms)
    return _saturate(lits, universe)


def leq(a: DataFormula, b: DataFormula) -> bool:
    """Lattice order: ``a`` implies ``b``."""
    if a.literals is None:
        return True
    if b.literals is None:
        return False
    return b.literals <= a.literals


def join(a: DataFormula, b: DataFormula) -> DataFormula:
    if a.literals is None:
        return b
    if b.literals is None:
        return a
    return DataFormula(a.literals & b.literals)


def join_all(formulas: Iterable[DataFormula]) -> DataFormula:
    out = BOTTOM
    for f in formulas:
        out = join(out, f)
    return out


def evaluate(a: DataFormula, assignment: Mapping[Term, int]) -> bool:
    if a.literals is None:
        return False
    for l in a.literals:
        try:
            x, y = assignment[l.lhs], assignment[l.rhs]
        except KeyError as exc:
            raise UndefinedTerm(exc.args[0]) from None
        if not l.holds(x, y):
            return False
    return True


def abstract(assignment: Mapping[Term, int], universe: Universe) -> DataFormula:
    """Strongest lattice element satisfied by ``assignment``."""
    out = []
    for l in universe.literals:
        if l.holds(assignment[l.lhs], assignment[l.rhs]):
            out.append(l)
    return DataFormula(frozenset(out))


def rename(a: DataFormula, mapping: Mapping[str, str]) -> DataFormula:
    """Rename universal variables inside register terms."""
    if a.literals is None:
        return a

    def sub(t: Term) -> Term:
        if isinstance(t, Register) and t.var in mapping:
            return Register(mapping[t.var], t.comp)
        return t

    return DataFormula(frozenset(lit(sub(l.lhs), l.rel, sub(l.rhs)) for l in a.literals))


# -- text form -----------------------------------------------------------

def _pair_relation(lits: frozenset[Literal], a: Term, b: Term) -> set[str]:
    """Possible orderings of ``a`` vs ``b`` ({'<', '=', '>'}) left open by ``lits``."""
    allowed = {"<", "=", ">"}
    rules = {
        Literal(a, Rel.LT, b): {"<"},
        Literal(b, Rel.LT, a): {">"},
        Literal(a, Rel.LEQ, b): {"<", "="},
        Literal(b, Rel.LEQ, a): {">", "="},
        Literal(a, Rel.EQ, b): {"="},
        Literal(a, Rel.NEQ, b): {"<", ">"},
    }
    for l, keep in rules.items():
        if l in lits:
            allowed &= keep
    return allowed


_SHOW = {
    frozenset("<"): ("<", False), frozenset(">"): ("<", True),
    frozenset("="): ("=", False), frozenset("<="): ("<=", False),
    frozenset(">="): ("<=", True), frozenset("<>"): ("!=", False),
}


def render(a: DataFormula) -> str:
    """Compact text: one literal per constrained pair, e.g. ``d(y1) <= d(y2) & d(y1) < k``."""
    if a.literals is None:
        return "false"
    pairs = sorted({_pair(l.lhs, l.rhs) for l in a.literals},
                   key=lambda p: (term_key(p[0]), term_key(p[1])))
    parts = []
    for x, y in pairs:
        allowed = _pair_relation(a.literals, x, y)
        if len(allowed) == 3:
            continue
        sym, flip = _SHOW[frozenset(allowed)]
        lhs, rhs = (y, x) if flip else (x, y)
        parts.append(f"{lhs} {sym} {rhs}")
    return " & ".join(parts) if parts else "true"


_TERM_RE = re.compile(r"^d(\d*)\((\w+)\)$")
_LIT_RE = re.compile(r"^\s*(\S+)\s*(<=|>=|!=|<|>|=)\s*(\S+)\s*$")


def parse_term(text: str) -> Term:
    m = _TERM_RE.match(text.strip())
    if m:
        return Register(m.group(2), int(m.group(1) or 0))
    if not re.match(r"^[A-Za-z_]\w*$", text.strip()):
        raise ValueError(f"bad data term: {text!r}")
    return Scalar(text.strip())


def parse_literals(text: str) -> list[Literal]:
    text = text.strip()
    if text in ("true", ""):
        return []
    out = []
    for part in text.split("&"):
        m = _LIT_RE.match(part)
        if not m:
            raise ValueError(f"bad literal: {part!r}")
        out.append(lit(parse_term(m.group(1)), m.group(2), parse_term(m.group(3))))
    return out


def parse(text: str, universe: Universe | None = None) -> DataFormula:
    """Inverse of :func:`render` (up to saturation over ``universe``)."""
    if text.strip() == "false":
        return BOTTOM
    return saturate(parse_literals(text), universe)
