"""Quantified formulas over positions of a data word, with a parseable text form.

Structural atoms talk about positions of names (pointers, scalar cells,
auxiliary markers, universal variables); data atoms wrap a lattice element.

Text grammar (also accepted by :func:`parse`)::

    f     := 'forall' NAME (',' NAME)* '.' f  |  imp
    imp   := or ('=>' imp)?
    or    := and ('|' and)*
    and   := unary ('&' unary)*
    unary := '!' unary | '(' f ')' | 'true' | 'false' | atom
    atom  := x '->*' y | x '->+' y | 'succ(' x ',' y ')' | x '==' y | x '==' 'nil'
           | y '==' x ('+'|'-') INT | 'first(' x ')' | 'last(' x ')' | data literal

A FixedDist from the start of the word uses ``0`` as its base: ``y1 == 0 + 2``.
Adjacent data literals in one conjunction are merged into one data atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from . import lattice
from .lattice import DataFormula


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class And(Formula):
    parts: tuple


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple
    body: Formula


# -- structural atoms ---------------------------------------------------------


@dataclass(frozen=True)
class PtrEq(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class PtrNull(Formula):
    x: str


@dataclass(frozen=True)
class Reach(Formula):
    """``x ->* y`` (position of x at or before y) or ``x ->+ y`` (strictly before)."""

    x: str
    y: str
    strict: bool = False


@dataclass(frozen=True)
class Succ(Formula):
    x: str
    y: str


@dataclass(frozen=True)
class FixedDist(Formula):
    """Position of ``y`` equals position of ``pv`` plus ``c``; ``pv=None`` is the word start."""

    pv: str | None
    y: str
    c: int


@dataclass(frozen=True)
class First(Formula):
    x: str


@dataclass(frozen=True)
class Last(Formula):
    x: str


@dataclass(frozen=True)
class DataAtom(Formula):
    formula: DataFormula


STRUCTURAL = (PtrEq, PtrNull, Reach, Succ, FixedDist, First, Last)
Atom = Union[PtrEq, PtrNull, Reach, Succ, FixedDist, First, Last, DataAtom]


def conj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        elif p == TRUE:
            continue
        elif p == FALSE:
            return FALSE
        else:
            flat.append(p)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        elif p == FALSE:
            continue
        elif p == TRUE:
            return TRUE
        else:
            flat.append(p)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def neg(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or)):
        for p in f.parts:
            yield from subformulas(p)
    elif isinstance(f, Not):
        yield from subformulas(f.arg)
    elif isinstance(f, Implies):
        yield from subformulas(f.lhs)
        yield from subformulas(f.rhs)
    elif isinstance(f, Forall):
        yield from subformulas(f.body)


def is_structural(f: Formula) -> bool:
    return not any(isinstance(g, DataAtom) for g in subformulas(f))


def names_of(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, (PtrEq, Reach, Succ)):
            out |= {g.x, g.y}
        elif isinstance(g, (PtrNull, First, Last)):
            out.add(g.x)
        elif isinstance(g, FixedDist):
            out.add(g.y)
            if g.pv is not None:
                out.add(g.pv)
    return out


# -- rendering -------------------------------------------------------------------


def _atom_str(f: Formula) -> str:
    if isinstance(f, PtrEq):
        return f"{f.x} == {f.y}"
    if isinstance(f, PtrNull):
        return f"{f.x} == nil"
    if isinstance(f, Reach):
        return f"{f.x} {'->+' if f.strict else '->*'} {f.y}"
    if isinstance(f, Succ):
        return f"succ({f.x},{f.y})"
    if isinstance(f, FixedDist):
        base = "0" if f.pv is None else f.pv
        sign = "-" if f.c < 0 else "+"
        return f"{f.y} == {base} {sign} {abs(f.c)}"
    if isinstance(f, First):
        return f"first({f.x})"
    if isinstance(f, Last):
        return f"last({f.x})"
    if isinstance(f, DataAtom):
        return lattice.render(f.formula)
    raise TypeError(f)


def _prec(f: Formula) -> int:
    if isinstance(f, Forall):
        return 0
    if isinstance(f, Implies):
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    if isinstance(f, DataAtom) and " & " in lattice.render(f.formula):
        return 3  # renders as a conjunction
    return 4


def _wrap(f: Formula, at_least: int) -> str:
    s = render(f)
    return f"({s})" if _prec(f) < at_least else s


def render(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Forall):
        return f"forall {','.join(f.vars)}. {render(f.body)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.lhs, 2)} => {_wrap(f.rhs, 1)}"
    if isinstance(f, Or):
        return " | ".join(_wrap(p, 3) for p in f.parts)
    if isinstance(f, And):
        return " & ".join(_wrap(p, 3) for p in f.parts)
    if isinstance(f, Not):
        return f"!{_wrap(f.arg, 4)}"
    return _atom_str(f)


def render_lines(f: Formula) -> str:
    """One top-level conjunct per line."""
    parts = f.parts if isinstance(f, And) else (f,)
    return "\n& ".join(_wrap(p, 3) for p in parts) + "\n"


# -- parsing -----------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(->\*|->\+|==|=>|<=|>=|!=|[()&|!.,<>=+\-]|\d+|[A-Za-z_]\w*)")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize near {text[pos:pos + 20]!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, text: str, universe):
        self.toks = _tokens(text)
        self.i = 0
        self.universe = universe

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        t = self.peek()
        if t is None or (expect is not None and t != expect):
            raise ValueError(f"expected {expect!r}, got {t!r}")
        self.i += 1
        return t

    def formula(self) -> Formula:
        if self.peek() == "forall":
            self.take()
            vs = [self.take()]
            while self.peek() == ",":
                self.take()
                vs.append(self.take())
            self.take(".")
            return Forall(tuple(vs), self.formula())
        return self.implication()

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.peek() == "=>":
            self.take()
            return Implies(lhs, self.formula())
        return lhs

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        merged: list[Formula] = []
        for p in parts:
            if isinstance(p, DataAtom) and merged and isinstance(merged[-1], DataAtom) \
                    and p.formula.literals is not None and merged[-1].formula.literals is not None:
                lits = merged[-1].formula.literals | p.formula.literals
                merged[-1] = DataAtom(lattice.saturate(lits, self._universe(lits)))
            else:
                merged.append(p)
        return merged[0] if len(merged) == 1 else And(tuple(merged))

    def _universe(self, lits):
        if self.universe is not None:
            return self.universe
        return lattice.Universe({t for l in lits for t in (l.lhs, l.rhs)})

    def unary(self) -> Formula:
        t = self.peek()
        if t == "!":
            self.take()
            return Not(self.unary())
        if t == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if t in ("true", "false"):
            self.take()
            return TRUE if t == "true" else FALSE
        if t in ("succ", "first", "last") and self.peek(1) == "(":
            self.take()
            self.take("(")
            x = self.take()
            if t == "succ":
                self.take(",")
                y = self.take()
                self.take(")")
                return Succ(x, y)
            self.take(")")
            return First(x) if t == "first" else Last(x)
        if re.match(r"^d\d*$", t or "") and self.peek(1) == "(":
            return self.data_literal()
        x = self.take()
        op = self.peek()
        if op in ("->*", "->+"):
            self.take()
            return Reach(x, self.take(), op == "->+")
        if op == "==":
            self.take()
            y = self.take()
            if self.peek() in ("+", "-"):
                sign = 1 if self.take() == "+" else -1
                c = sign * int(self.take())
                return FixedDist(None if y == "0" else y, x, c)
            if y == "nil":
                return PtrNull(x)
            return PtrEq(x, y)
        if op in ("<", "<=", ">", ">=", "=", "!="):
            self.i -= 1
            return self.data_literal()
        raise ValueError(f"unexpected token {op!r} after {x!r}")

    def data_term(self) -> str:
        t = self.take()
        if re.match(r"^d\d*$", t) and self.peek() == "(":
            self.take("(")
            v = self.take()
            self.take(")")
            return f"{t}({v})"
        return t

    def data_literal(self) -> Formula:
        a = self.data_term()
        op = self.take()
        b = self.data_term()
        l = lattice.lit(lattice.parse_term(a), op, lattice.parse_term(b))
        return DataAtom(lattice.saturate([l], self._universe([l])))


def parse(text: str, universe=None) -> Formula:
    p = _Parser(text, universe)
    f = p.formula()
    if p.peek() is not None:
        raise ValueError(f"trailing input at {p.peek()!r}")
    return f
