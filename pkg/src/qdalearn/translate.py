"""Translation of elastic automata into quantified formulas.

Pipeline:

1. ``normalize`` sends every transition that places a universal variable on an
   auxiliary position (``nil`` and the array markers) to a state ``top`` that
   outputs true and loops on every letter.
2. ``simple_paths`` walks the product of automaton states with the set of
   names read so far.  Since every non-blank letter consumes a name, these
   paths are acyclic.  A path ends when all names are read, or early at a node
   from which every continuation is accepted.  Per path, irrelevant blank loops
   are dropped and the path is turned into a structural guard: names in one
   letter are equal, a blank loop between two letters gives a strict order, no
   loop gives a successor step that is folded into a fixed distance from the
   nearest pointer.
3. ``to_strand`` and ``to_apf`` conjoin ``forall Y. guard => output`` over the
   paths with a closing conjunct saying that some guard matches.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import lattice
from .automaton import Qda, dead_states, reachable
from .elastic import is_elastic
from .lattice import TOP, DataFormula, Register, Rel
from .logic import (
    FALSE, TRUE, DataAtom, First, FixedDist, Forall, Formula, Implies, Last, Not, PtrEq,
    PtrNull, Reach, Succ, conj, disj, render,
)
from .words import BLANK, NIL, Letter, is_aux


class NotElastic(ValueError):
    pass


def letters_over(pointers, variables) -> list[Letter]:
    pointers = sorted(pointers)
    out = []
    for r in range(len(pointers) + 1):
        for ps in itertools.combinations(pointers, r):
            for y in [None, *sorted(variables)]:
                out.append(Letter(frozenset(ps), y))
    return out


def _reads_y_on_aux(x: Letter, blocked=frozenset()) -> bool:
    return x.var is not None and any(is_aux(p) or p in blocked for p in x.pointers)


def _absorbing_top(e: Qda, q) -> bool:
    return e.outputs[q] == TOP and all(e.delta.get((q, x), q) == q for x in e.alphabet)


def normalize(e: Qda, blocked=()) -> Qda:
    """Send universal variables placed on auxiliary (or ``blocked``) cells to an all-accepting state.

    The alphabet grows to every letter over the automaton's names, and states
    that already accept everything loop on the new letters too.
    """
    if not is_elastic(e):
        raise NotElastic("normalization needs an elastic automaton")
    blocked = frozenset(blocked)
    full = letters_over(e.pointers, e.variables)
    aux_letters = [x for x in full if _reads_y_on_aux(x, blocked)]
    top = ("top",)
    while top in e.outputs:
        top = top + ("'",)
    dead = dead_states(e)
    live = [q for q in reachable(e) if q not in dead]
    delta = dict(e.delta)
    for q in live:
        if _absorbing_top(e, q):
            for x in full:
                delta[(q, x)] = q
            continue
        for x in aux_letters:
            delta[(q, x)] = top
    outputs = dict(e.outputs)
    if any(r == top for r in delta.values()):
        for x in full:
            delta[(top, x)] = top
        outputs[top] = TOP
    return e.with_(delta=delta, outputs=outputs, alphabet=tuple(sorted(set(e.alphabet) | set(full))))


@dataclass
class Path:
    letters: tuple[Letter, ...]
    states: tuple
    complete: bool  # False: stopped at an all-accepting node, remaining names follow
    remaining: tuple[str, ...] = ()
    loops: tuple[bool, ...] = ()
    body: DataFormula = TOP
    guard: Formula = TRUE
    renaming: dict = field(default_factory=dict)
    outside_fragment: bool = False

    @property
    def final(self):
        return self.states[-1]

    def variable_order(self) -> list[str]:
        return [x.var for x in self.letters if x.var is not None]


class _Walker:
    def __init__(self, a: Qda):
        self.a = a
        self.dead = dead_states(a)
        self.pointers = frozenset(a.pointers)
        self.ys = frozenset(a.variables)
        self.letters = [x for x in a.alphabet if not x.is_blank]
        self._universal: dict = {}

    def has_loop(self, q) -> bool:
        return self.a.delta.get((q, BLANK)) == q

    def universal(self, q, sp: frozenset, sy: frozenset) -> bool:
        key = (q, sp, sy)
        hit = self._universal.get(key)
        if hit is not None:
            return hit
        ok = self.a.outputs[q] == TOP and self.has_loop(q)
        if ok:
            rest_p = sorted(self.pointers - sp)
            rest_y = sorted(self.ys - sy)
            for r in range(len(rest_p) + 1):
                for ps in itertools.combinations(rest_p, r):
                    for y in [None, *rest_y]:
                        if not ps and y is None:
                            continue
                        nxt = self.a.delta.get((q, Letter(frozenset(ps), y)))
                        if nxt is None or not self.universal(
                                nxt, sp | frozenset(ps), sy | ({y} if y else set())):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
        self._universal[key] = ok
        return ok

    def paths(self) -> list[Path]:
        out: list[Path] = []

        def walk(q, sp, sy, letters, states):
            if self.universal(q, sp, sy):
                rest = tuple(sorted(self.pointers - sp)) + tuple(sorted(self.ys - sy))
                out.append(Path(tuple(letters), tuple(states), complete=not rest, remaining=rest))
                return
            if sp == self.pointers and sy == self.ys:
                if not self.a.outputs[q].is_bottom:
                    out.append(Path(tuple(letters), tuple(states), complete=True))
                return
            for x in self.letters:
                if x.pointers & sp or (x.var is not None and (x.var in sy or x.var not in self.ys)):
                    continue
                if not x.pointers <= self.pointers:
                    continue
                r = self.a.delta.get((q, x))
                if r is None or r in self.dead:
                    continue
                walk(r, sp | x.pointers, sy | ({x.var} if x.var else set()), letters + [x],
                     states + [r])

        walk(self.a.initial, frozenset(), frozenset(), [], [self.a.initial])
        return out


def _relevant_loops(w: _Walker, p: Path) -> tuple[bool, ...]:
    loops = [w.has_loop(q) for q in p.states]
    pinned = {len(loops) - 1} if not p.complete else set()
    changed = True
    while changed:
        changed = False
        for i, x in enumerate(p.letters):
            if x.pointers or x.var is None:
                continue
            if loops[i + 1] and not loops[i] and i + 1 not in pinned:
                loops[i + 1] = False
                changed = True
            elif loops[i] and not loops[i + 1] and i not in pinned:
                loops[i] = False
                changed = True
    return tuple(loops)


def _rep(x: Letter) -> str:
    if NIL in x.pointers:
        return NIL
    plain = sorted(p for p in x.pointers if not is_aux(p))
    if plain:
        return plain[0]
    if x.pointers:
        return sorted(x.pointers)[0]
    return x.var


def _guard(p: Path) -> tuple[Formula, bool]:
    """Structural guard of a path and whether it stays inside the decidable fragment."""
    atoms: list[Formula] = []
    inside = True
    xs = p.letters
    m = len(xs)
    reps = [_rep(x) for x in xs]
    for x, r in zip(xs, reps):
        names = sorted(x.pointers) + ([x.var] if x.var else [])
        for n in names:
            if n == r:
                continue
            atoms.append(PtrNull(n) if r == NIL else PtrEq(n, r))
    if m == 0:
        return conj(*atoms), inside
    loops = p.loops
    # components of anchors linked by successor steps
    succ = [not loops[i + 1] for i in range(m - 1)]
    starts_at_0 = not loops[0]
    ends_at_last = p.complete and not loops[m]
    if starts_at_0 and NIL not in xs[0].pointers:
        atoms.append(First(reps[0]))
    for i in range(m - 1):
        if not succ[i]:
            atoms.append(Reach(reps[i], reps[i + 1], strict=True))
    comps: list[list[int]] = [[0]]
    for i in range(m - 1):
        if succ[i]:
            comps[-1].append(i + 1)
        else:
            comps.append([i + 1])
    for comp in comps:
        anchored = [k for k in comp if xs[k].pointers]
        for k, k2 in zip(comp, comp[1:]):
            if xs[k].pointers and xs[k2].pointers:
                atoms.append(Succ(reps[k], reps[k2]))
        for k in comp:
            if xs[k].pointers:
                continue
            y = xs[k].var
            left = [j for j in anchored if j < k]
            right = [j for j in anchored if j > k]
            if left:
                atoms.append(FixedDist(reps[left[-1]], y, k - left[-1]))
            if right:
                atoms.append(FixedDist(reps[right[0]], y, k - right[0]))
            if not left and not right:
                if comp[0] == 0 and starts_at_0:
                    atoms.append(FixedDist(None, y, k))
                elif k != comp[0]:
                    atoms.append(Succ(reps[k - 1], y))
                    inside = False
    if ends_at_last:
        atoms.append(Last(reps[m - 1]))
    for r in p.remaining:
        atoms.append(Reach(reps[m - 1], r, strict=True))
    return conj(*atoms), inside


def _order_renaming(p: Path, variables) -> dict:
    seen = p.variable_order() + [r for r in p.remaining if r in variables]
    order = [y for y in seen] + [y for y in sorted(variables) if y not in seen]
    target = sorted(variables)
    return {y: t for y, t in zip(order, target) if y != t}


def rename_formula(f: Formula, mapping: dict) -> Formula:
    if not mapping:
        return f
    s = lambda n: mapping.get(n, n)  # noqa: E731
    if isinstance(f, PtrEq):
        return PtrEq(s(f.x), s(f.y))
    if isinstance(f, PtrNull):
        return PtrNull(s(f.x))
    if isinstance(f, Reach):
        return Reach(s(f.x), s(f.y), f.strict)
    if isinstance(f, Succ):
        return Succ(s(f.x), s(f.y))
    if isinstance(f, FixedDist):
        return FixedDist(None if f.pv is None else s(f.pv), s(f.y), f.c)
    if isinstance(f, First):
        return First(s(f.x))
    if isinstance(f, Last):
        return Last(s(f.x))
    if isinstance(f, DataAtom):
        return DataAtom(lattice.rename(f.formula, mapping))
    if isinstance(f, Not):
        return Not(rename_formula(f.arg, mapping))
    if isinstance(f, Implies):
        return Implies(rename_formula(f.lhs, mapping), rename_formula(f.rhs, mapping))
    if isinstance(f, Forall):
        return Forall(f.vars, rename_formula(f.body, mapping))
    if hasattr(f, "parts"):
        return type(f)(tuple(rename_formula(x, mapping) for x in f.parts))
    return f


def simple_paths(e: Qda) -> list[Path]:
    """Accepting simple paths of a normalized elastic automaton, with guards and outputs."""
    w = _Walker(e)
    paths = w.paths()
    for p in paths:
        p.loops = _relevant_loops(w, p)
        p.body = e.outputs[p.final] if p.complete else TOP
        p.guard, inside = _guard(p)
        p.outside_fragment = not inside
        p.renaming = _order_renaming(p, e.variables)
    return paths


def _guard_atoms(g: Formula) -> list[Formula]:
    if g == TRUE:
        return []
    return list(g.parts) if hasattr(g, "parts") else [g]


def _closing(variables, guards, drop=lambda atom: False) -> Formula:
    clauses = []
    for g in guards:
        atoms = [a for a in _guard_atoms(g) if not drop(a)]
        if not _guard_atoms(g):
            return TRUE  # some guard is always true
        clauses.append(disj(*[Not(a) for a in atoms]))
    return Forall(tuple(variables), Implies(conj(*clauses), FALSE))


@dataclass
class Translation:
    formula: Formula
    paths: list[Path]
    flavor: str

    @property
    def inside_fragment(self) -> bool:
        return not any(p.outside_fragment for p in self.paths)

    def __str__(self) -> str:
        return render(self.formula)


def _implication(variables, guard: Formula, body: DataFormula, mapping: dict) -> Formula:
    f = Forall(tuple(sorted(variables)), Implies(guard, DataAtom(body)))
    return rename_formula(f, mapping)


def _assemble(variables, paths, guards, bodies, drop=lambda a: False) -> Formula:
    parts = []
    for p, g, b in zip(paths, guards, bodies):
        if b == TOP:
            continue
        parts.append(_implication(variables, g, b, p.renaming))
    closing = _closing(sorted(variables), guards, drop)
    return conj(*parts, closing)


def to_strand(e: Qda, *, normalized: bool = False, blocked=()) -> Translation:
    n = e if normalized else normalize(e, blocked)
    paths = simple_paths(n)
    f = _assemble(n.variables, paths, [p.guard for p in paths], [p.body for p in paths])
    return Translation(f, paths, "strand")


def _is_universal_pair(a: Formula, ys) -> bool:
    return isinstance(a, Reach) and a.x in ys and a.y in ys


def weaken_pair(body: DataFormula, y1: str, y2: str) -> DataFormula:
    """Drop strictness between ``d(y1)`` and ``d(y2)`` so the diagonal ``y1 = y2`` is allowed."""
    if body.literals is None:
        return body
    out = set()
    for l in body.literals:
        terms = {l.lhs, l.rhs}
        same_pair = (all(isinstance(t, Register) for t in terms)
                     and {t.var for t in terms} == {y1, y2}
                     and l.lhs.comp == l.rhs.comp)
        if same_pair and l.rel is Rel.LT:
            out.add(lattice.lit(l.lhs, Rel.LEQ, l.rhs))
        elif same_pair and l.rel is Rel.NEQ:
            continue
        else:
            out.add(l)
    if out == set(body.literals):
        return body
    return lattice.saturate(out, lattice.Universe(body.terms()))


def to_apf(e: Qda, *, normalized: bool = False, blocked=()) -> Translation:
    n = e if normalized else normalize(e, blocked)
    ys = set(n.variables)
    paths = simple_paths(n)
    guards, bodies = [], []
    for p in paths:
        atoms = _guard_atoms(p.guard)
        body = p.body
        relaxed = []
        for a in atoms:
            if _is_universal_pair(a, ys) and a.strict:
                relaxed.append(Reach(a.x, a.y, strict=False))
                body = weaken_pair(body, a.x, a.y)
            else:
                relaxed.append(a)
        guards.append(conj(*relaxed))
        bodies.append(body)
    f = _assemble(n.variables, paths, guards, bodies, drop=lambda a: _is_universal_pair(a, ys))
    return Translation(f, paths, "apf")


# -- display renderings ---------------------------------------------------------------


def render_apf(f: Formula) -> str:
    """Array-style text: index order, index arithmetic and ``A[y]`` for data."""
    from .logic import And, Const, Or

    def term(t) -> str:
        if isinstance(t, Register):
            arr = "A" if t.comp == 0 else f"A{t.comp}"
            return f"{arr}[{t.var}]"
        return str(t)

    def data(a: DataFormula) -> str:
        text = lattice.render(a)
        for t in sorted(a.terms(), key=lambda t: -len(str(t))):
            text = text.replace(str(t), term(t))
        return text

    def go(g: Formula, wrap: bool = False) -> str:
        if isinstance(g, Const):
            s = "true" if g.value else "false"
        elif isinstance(g, Forall):
            s = f"forall {','.join(g.vars)}. {go(g.body)}"
        elif isinstance(g, Implies):
            s = f"{go(g.lhs, True)} => {go(g.rhs, True)}"
        elif isinstance(g, And):
            s = " & ".join(go(x, True) for x in g.parts)
        elif isinstance(g, Or):
            s = " | ".join(go(x, True) for x in g.parts)
        elif isinstance(g, Not):
            return f"!{go(g.arg, True)}"
        elif isinstance(g, Reach):
            return f"{g.x} {'<' if g.strict else '<='} {g.y}"
        elif isinstance(g, Succ):
            return f"{g.y} = {g.x} + 1"
        elif isinstance(g, FixedDist):
            base = "0" if g.pv is None else g.pv
            return f"{g.y} = {base} {'-' if g.c < 0 else '+'} {abs(g.c)}"
        elif isinstance(g, PtrEq):
            return f"{g.x} = {g.y}"
        elif isinstance(g, PtrNull):
            return f"{g.x} = nil"
        elif isinstance(g, First):
            return f"{g.x} = 0"
        elif isinstance(g, Last):
            return f"{g.x} = last"
        elif isinstance(g, DataAtom):
            s = data(g.formula)
            wrap = wrap and " & " in s
        else:
            raise TypeError(g)
        return f"({s})" if wrap and not isinstance(g, Const) else s

    return go(f)


# -- SMT-LIB -----------------------------------------------------------------------


def _smt_atom(a: Formula, flavor: str) -> str:
    if isinstance(a, PtrEq):
        return f"(= {a.x} {a.y})"
    if isinstance(a, PtrNull):
        return f"(= {a.x} {NIL})"
    if isinstance(a, Reach):
        if flavor == "apf":
            return f"({'<' if a.strict else '<='} {a.x} {a.y})"
        return f"({'rplus' if a.strict else 'rstar'} {a.x} {a.y})"
    if isinstance(a, Succ):
        return f"(= {a.y} (+ {a.x} 1))" if flavor == "apf" else f"(= (next {a.x}) {a.y})"
    if isinstance(a, FixedDist):
        base = "0" if a.pv is None else a.pv
        if flavor == "apf":
            return f"(= {a.y} (+ {base} {a.c}))" if a.c >= 0 else f"(= {a.y} (- {base} {-a.c}))"
        return f"(dist {base} {a.y} {a.c})"
    if isinstance(a, First):
        return f"(= {a.x} 0)" if flavor == "apf" else f"(first {a.x})"
    if isinstance(a, Last):
        return f"(= {a.x} (- len 1))" if flavor == "apf" else f"(last {a.x})"
    raise TypeError(a)


def _smt_term(t, flavor: str) -> str:
    name = t.var if isinstance(t, Register) else t.name
    comp = t.comp if isinstance(t, Register) else 0
    fn = "A" if comp == 0 else f"A{comp}"
    if flavor == "apf":
        return f"(select {fn} {name})"
    return f"({'data' if comp == 0 else f'data{comp}'} {name})"


_SMT_REL = {Rel.LT: "<", Rel.LEQ: "<=", Rel.EQ: "="}


def _smt_data(a: DataFormula, flavor: str) -> str:
    if a.literals is None:
        return "false"
    if not a.literals:
        return "true"
    parts = []
    for l in sorted(a.literals, key=str):
        lhs, rhs = _smt_term(l.lhs, flavor), _smt_term(l.rhs, flavor)
        if l.rel is Rel.NEQ:
            parts.append(f"(not (= {lhs} {rhs}))")
        else:
            parts.append(f"({_SMT_REL[l.rel]} {lhs} {rhs})")
    return parts[0] if len(parts) == 1 else "(and " + " ".join(parts) + ")"


def _smt(f: Formula, flavor: str) -> str:
    from .logic import And, Const, Or

    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, And):
        return "(and " + " ".join(_smt(p, flavor) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(_smt(p, flavor) for p in f.parts) + ")"
    if isinstance(f, Not):
        return f"(not {_smt(f.arg, flavor)})"
    if isinstance(f, Implies):
        return f"(=> {_smt(f.lhs, flavor)} {_smt(f.rhs, flavor)})"
    if isinstance(f, Forall):
        sort = "Int" if flavor == "apf" else "Loc"
        binds = " ".join(f"({v} {sort})" for v in f.vars)
        return f"(forall ({binds}) {_smt(f.body, flavor)})"
    if isinstance(f, DataAtom):
        return _smt_data(f.formula, flavor)
    return _smt_atom(f, flavor)


_STRAND_PRELUDE = """\
(declare-sort Loc 0)
(declare-fun next (Loc) Loc)
(declare-fun rstar (Loc Loc) Bool)
(declare-fun rplus (Loc Loc) Bool)
(declare-fun first (Loc) Bool)
(declare-fun last (Loc) Bool)
(declare-fun dist (Loc Loc Int) Bool)
(assert (forall ((x Loc)) (rstar x x)))
(assert (forall ((x Loc) (y Loc) (z Loc)) (=> (and (rstar x y) (rstar y z)) (rstar x z))))
(assert (forall ((x Loc) (y Loc)) (=> (and (rstar x y) (rstar y x)) (= x y))))
(assert (forall ((x Loc) (y Loc)) (= (rplus x y) (and (rstar x y) (not (= x y))))))
(assert (forall ((x Loc)) (rstar x (next x))))
(assert (forall ((x Loc) (y Loc)) (= (dist x y 0) (= x y))))
(assert (forall ((x Loc) (y Loc)) (= (dist x y 1) (= (next x) y))))
"""


def emit_smtlib(t: Translation | Formula, flavor: str | None = None) -> str:
    """SMT-LIB 2 text asserting the formula (emitted only, never solved here)."""
    from .logic import names_of, subformulas

    f = t.formula if isinstance(t, Translation) else t
    flavor = flavor or (t.flavor if isinstance(t, Translation) else "strand")
    if flavor not in ("strand", "apf"):
        raise ValueError(f"unknown flavor {flavor!r}")
    bound = {v for g in subformulas(f) if isinstance(g, Forall) for v in g.vars}
    free = sorted(names_of(f) - bound)
    comps = {0}
    scalars = set()
    for g in subformulas(f):
        if isinstance(g, DataAtom):
            for term in g.formula.terms():
                if isinstance(term, Register):
                    comps.add(term.comp)
                else:
                    scalars.add(term.name)
    free = sorted(set(free) | scalars)
    lines = ["(set-logic ALL)"]
    if flavor == "apf":
        for c in sorted(comps):
            lines.append(f"(declare-const {'A' if c == 0 else f'A{c}'} (Array Int Int))")
        lines.append("(declare-const len Int)")
        for n in free:
            lines.append(f"(declare-const {n} Int)")
    else:
        lines.append(_STRAND_PRELUDE.rstrip())
        for c in sorted(comps):
            lines.append(f"(declare-fun {'data' if c == 0 else f'data{c}'} (Loc) Int)")
        for n in free:
            lines.append(f"(declare-const {n} Loc)")
    lines.append(f"(assert {_smt(f, flavor)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
