"""Quantified data automata viewed as Moore machines over symbolic letters.

A :class:`Qda` is deterministic; a missing transition leads to an implicit
sink whose output is ``bottom`` (``BOTTOM`` for QDAs).  The class is generic in
the output type so that the learner can reuse it for plain Moore machines.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from typing import Any, Hashable, Iterable, Mapping, Sequence

from . import lattice
from .lattice import BOTTOM, Register, Scalar, Universe
from .words import (
    Frame, Letter, ValCell, WordTooShort, is_aux, parse_letter, valuations,
)

State = Hashable


class Qda:
    def __init__(self, initial: State, delta: Mapping[tuple[State, Letter], State],
                 outputs: Mapping[State, Any], alphabet: Iterable[Letter] | None = None,
                 pointers: Iterable[str] | None = None, variables: Iterable[str] | None = None,
                 bottom: Any = BOTTOM):
        self.initial = initial
        self.delta: dict[tuple[State, Letter], State] = dict(delta)
        self.outputs: dict[State, Any] = dict(outputs)
        self.bottom = bottom
        for (q, _), r in self.delta.items():
            for s in (q, r):
                if s not in self.outputs:
                    raise ValueError(f"state {s!r} has no output")
        if initial not in self.outputs:
            raise ValueError("initial state has no output")
        letters = set(alphabet) if alphabet is not None else set()
        letters.update(a for _, a in self.delta)
        self.alphabet: tuple[Letter, ...] = tuple(sorted(letters))
        if pointers is None:
            pointers = {p for a in self.alphabet for p in a.pointers}
        if variables is None:
            variables = {a.var for a in self.alphabet if a.var is not None}
        self.pointers: frozenset[str] = frozenset(pointers)
        self.variables: tuple[str, ...] = tuple(sorted(variables))

    @property
    def states(self) -> list[State]:
        return list(self.outputs)

    def __len__(self) -> int:
        return len(self.outputs)

    def step(self, q: State | None, a: Letter) -> State | None:
        if q is None:
            return None
        return self.delta.get((q, a))

    def run(self, word: Sequence[Letter]) -> State | None:
        q = self.initial
        for a in word:
            q = self.delta.get((q, a))
            if q is None:
                return None
        return q

    def output(self, q: State | None) -> Any:
        return self.bottom if q is None else self.outputs[q]

    def output_of(self, word: Sequence[Letter]) -> Any:
        return self.output(self.run(word))

    def with_(self, **changes) -> "Qda":
        kw = dict(initial=self.initial, delta=self.delta, outputs=self.outputs,
                  alphabet=self.alphabet, pointers=self.pointers, variables=self.variables,
                  bottom=self.bottom)
        kw.update(changes)
        return Qda(**kw)

    def __repr__(self) -> str:
        return f"Qda({len(self)} states, {len(self.alphabet)} letters)"


def reach(a: Qda, w: Sequence[Letter]) -> State | None:
    return a.run(w)


def registers_of(v: Sequence[ValCell]) -> dict | None:
    """Term assignment read off a valuation word, or None if a variable repeats."""
    env: dict = {}
    seen = set()
    for cell in v:
        if cell.var is not None:
            if cell.var in seen:
                return None
            seen.add(cell.var)
            for j, d in enumerate(cell.data):
                env[Register(cell.var, j)] = d
        if cell.data:
            for p in cell.pointers:
                env[Scalar(p)] = cell.data[0]
    return env


def accepts_valuation(a: Qda, v: Sequence[ValCell]) -> bool:
    env = registers_of(v)
    if env is None:
        return False
    q = a.run([Letter(c.pointers, c.var) for c in v])
    f = a.output(q)
    if f.is_bottom:
        return False
    return lattice.evaluate(f, env)


def accepts_data_word(a: Qda, w: Sequence, variables: Sequence[str] | None = None) -> bool:
    """All valuations accepted; vacuously true when the word is shorter than |Y|."""
    ys = a.variables if variables is None else tuple(variables)
    try:
        return all(accepts_valuation(a, v) for v in valuations(w, ys))
    except WordTooShort:
        return True


class Acceptor:
    """Data-word acceptance for many words, caching the run per pointer skeleton.

    For each skeleton the automaton is run once per valuation; only the
    outputs that are neither top nor bottom need looking at the data.  Gives
    the same verdicts as :func:`accepts_data_word`.
    """

    def __init__(self, a: Qda, variables: Sequence[str] | None = None):
        self.a = a
        self.variables = a.variables if variables is None else tuple(variables)
        self._cache: dict[tuple, list | None] = {}

    def _checks(self, skel: tuple) -> list | None:
        hit = self._cache.get(skel, False)
        if hit is not False:
            return hit
        names = {p: i for i, ps in enumerate(skel) for p in ps}
        checks: list | None = []
        k = len(self.variables)
        for positions in itertools.permutations(range(len(skel)), k):
            at = dict(zip(positions, self.variables))
            f = self.a.output_of([Letter(ps, at.get(i)) for i, ps in enumerate(skel)])
            if f.is_bottom:
                checks = None
                break
            if f.is_top:
                continue
            where = dict(zip(self.variables, positions))
            compiled = []
            for l in f.literals:
                ends = []
                for t in (l.lhs, l.rhs):
                    if isinstance(t, Register):
                        ends.append((where[t.var], t.comp))
                    else:
                        ends.append((names[t.name], 0))
                compiled.append((ends[0], l, ends[1]))
            checks.append(compiled)
        self._cache[skel] = checks
        return checks

    def __call__(self, w: Sequence) -> bool:
        if len(w) < len(self.variables):
            return True
        checks = self._checks(tuple(c.pointers for c in w))
        if checks is None:
            return False
        for compiled in checks:
            for (i, ci), l, (j, cj) in compiled:
                if not l.holds(w[i].data[ci], w[j].data[cj]):
                    return False
        return True

    def accepts_all(self, w: Sequence, domains: Sequence[Iterable[tuple]]) -> bool:
        """Accepts every word with ``w``'s pointers whose data at position i lies in ``domains[i]``.

        Exact: a conjunction holds on a product set iff each literal does on
        the (at most two) factors it mentions.
        """
        if len(w) < len(self.variables):
            return True
        checks = self._checks(tuple(c.pointers for c in w))
        if checks is None:
            return False
        doms = [list(d) for d in domains]
        for compiled in checks:
            for (i, ci), l, (j, cj) in compiled:
                if i == j:
                    pairs = ((d, d) for d in doms[i])
                else:
                    pairs = itertools.product(doms[i], doms[j])
                if not all(l.holds(a[ci], b[cj]) for a, b in pairs):
                    return False
        return True


# -- structure -----------------------------------------------------------------

def reachable(a: Qda) -> list[State]:
    seen = {a.initial}
    order = [a.initial]
    queue = deque(order)
    while queue:
        q = queue.popleft()
        for x in a.alphabet:
            r = a.delta.get((q, x))
            if r is not None and r not in seen:
                seen.add(r)
                order.append(r)
                queue.append(r)
    return order


def complete(a: Qda) -> Qda:
    """Totalise the transition function with an explicit sink."""
    missing = [(q, x) for q in a.outputs for x in a.alphabet if (q, x) not in a.delta]
    if not missing:
        return a
    sink = ("sink",)
    while sink in a.outputs:
        sink = sink + ("'",)
    delta = dict(a.delta)
    for key in missing:
        delta[key] = sink
    for x in a.alphabet:
        delta[(sink, x)] = sink
    outputs = dict(a.outputs)
    outputs[sink] = a.bottom
    return a.with_(delta=delta, outputs=outputs)


def dead_states(a: Qda) -> set[State]:
    """States from which no state with a non-bottom output is reachable."""
    pred: dict[State, set[State]] = {q: set() for q in a.outputs}
    for (q, _), r in a.delta.items():
        pred[r].add(q)
    live = {q for q, f in a.outputs.items() if f != a.bottom}
    queue = deque(live)
    while queue:
        r = queue.popleft()
        for q in pred[r]:
            if q not in live:
                live.add(q)
                queue.append(q)
    return set(a.outputs) - live


def trim(a: Qda) -> Qda:
    """Drop dead and unreachable states; transitions into them become undefined."""
    dead = dead_states(a)
    if a.initial in dead:
        return a.with_(delta={}, outputs={a.initial: a.bottom})
    keep = set(reachable(a.with_(delta={k: r for k, r in a.delta.items() if r not in dead})))
    delta = {(q, x): r for (q, x), r in a.delta.items() if q in keep and r in keep}
    return a.with_(delta=delta, outputs={q: a.outputs[q] for q in a.outputs if q in keep})


def canonical_form(a: Qda) -> tuple:
    """Relabel states by BFS order over the sorted alphabet (complete input assumed)."""
    order = reachable(a)
    num = {q: i for i, q in enumerate(order)}
    trans = tuple(tuple(num.get(a.delta.get((q, x)), -1) for x in a.alphabet) for q in order)
    return (a.alphabet, trans, tuple(a.outputs[q] for q in order))


def relabel(a: Qda) -> Qda:
    order = reachable(a)
    num = {q: i for i, q in enumerate(order)}
    delta = {(num[q], x): num[r] for (q, x), r in a.delta.items() if q in num}
    return a.with_(initial=0, delta=delta, outputs={num[q]: a.outputs[q] for q in order})


def minimize(a: Qda) -> Qda:
    """Unique minimal Moore machine computing the same word-to-output function.

    Partition refinement seeded by the output, on the reachable part of the
    completed machine; states are then numbered canonically.
    """
    a = complete(a)
    states = reachable(a)
    ids: dict[Any, int] = {}
    block = {q: ids.setdefault(a.outputs[q], len(ids)) for q in states}
    n_blocks = len(ids)
    while True:
        sigs: dict[tuple, int] = {}
        new = {}
        for q in states:
            sig = (block[q],) + tuple(block[a.delta[(q, x)]] for x in a.alphabet)
            new[q] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == n_blocks:
            break
        n_blocks = len(sigs)
    rep: dict[int, State] = {}
    for q in states:
        rep.setdefault(block[q], q)
    delta = {(block[q], x): block[a.delta[(q, x)]] for b, q in rep.items() for x in a.alphabet}
    outputs = {b: a.outputs[q] for b, q in rep.items()}
    return relabel(a.with_(initial=block[a.initial], delta=delta, outputs=outputs))


def isomorphic(a: Qda, b: Qda) -> bool:
    return canonical_form(complete(a)) == canonical_form(complete(b))


def with_alphabet(a: Qda, letters: Iterable[Letter]) -> Qda:
    return a.with_(alphabet=tuple(sorted(set(a.alphabet) | set(letters))))


# -- language comparisons ------------------------------------------------------------

def _bfs_word(parent: dict, node) -> tuple[Letter, ...]:
    out = []
    while parent[node] is not None:
        node, x = parent[node]
        out.append(x)
    return tuple(reversed(out))


def moore_counterexample(a: Qda, b: Qda, alphabet: Iterable[Letter] | None = None):
    """Shortest word (over all words) on which the outputs differ, or None."""
    letters = sorted(set(alphabet) if alphabet is not None else set(a.alphabet) | set(b.alphabet))
    start = (a.initial, b.initial)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        qa, qb = node
        if a.output(qa) != b.output(qb):
            return _bfs_word(parent, node)
        for x in letters:
            nxt = (a.step(qa, x), b.step(qb, x))
            if nxt not in parent:
                parent[nxt] = (node, x)
                queue.append(nxt)
    return None


def inclusion_counterexample(a: Qda, b: Qda, pointers: Iterable[str] | None = None,
                             variables: Iterable[str] | None = None):
    """Shortest valid symbolic word ``w`` with ``out_a(w)`` not below ``out_b(w)``, or None.

    Product reachability restricted to prefixes that can still be extended to
    a valid word (each pointer and universal variable read exactly once).
    """
    pv = frozenset(pointers) if pointers is not None else a.pointers | b.pointers
    ys = frozenset(variables) if variables is not None else frozenset(a.variables) | frozenset(b.variables)
    letters = [x for x in sorted(set(a.alphabet) | set(b.alphabet))
               if x.pointers <= pv and (x.var is None or x.var in ys)]
    start = (a.initial, b.initial, frozenset(), frozenset())
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        qa, qb, sp, sy = node
        if qa is None:
            continue  # bottom is below everything
        if sp == pv and sy == ys and not lattice.leq(a.output(qa), b.output(qb)):
            return _bfs_word(parent, node)
        for x in letters:
            if x.pointers & sp or (x.var is not None and x.var in sy):
                continue
            nxt = (a.step(qa, x), b.step(qb, x), sp | x.pointers,
                   sy | {x.var} if x.var is not None else sy)
            if nxt not in parent:
                parent[nxt] = (node, x)
                queue.append(nxt)
    return None


def included(a: Qda, b: Qda, **kw) -> bool:
    """Valuation-language inclusion L_val(a) ⊆ L_val(b)."""
    return inclusion_counterexample(a, b, **kw) is None


def equivalent(a: Qda, b: Qda, **kw) -> bool:
    return included(a, b, **kw) and included(b, a, **kw)


TOP_STATE = ("top",)


def restrict_to_frame(a: Qda, frame: Frame, pointers: Iterable[str], variables: Sequence[str],
                      blocked: Iterable[str] = ()) -> Qda:
    """The part of ``a`` that reads well-formed encodings, minimized.

    A learned hypothesis is only pinned down on the words the teacher was asked
    about; elsewhere it generalizes arbitrarily.  This keeps the behaviour of
    ``a`` on valid words that follow ``frame`` and drops everything else.  A
    letter that places a universal variable out of order or on an auxiliary or
    blocked cell leads to an absorbing state with output ``TOP``: such
    valuations repeat information carried by their canonical twins.
    """
    pv = frozenset(pointers) | frame.marks
    ys = tuple(variables)
    blocked = frozenset(blocked)
    start = (a.initial, frame.start(), frozenset(), 0)
    seen = {start}
    queue = deque([start])
    delta: dict = {}
    outputs: dict = {}
    to_top = False
    # every pointer set of the alphabet, with any variable or none
    letters = sorted({Letter(x.pointers, y) for x in a.alphabet for y in (None, *ys)})
    while queue:
        node = queue.popleft()
        q, fs, sp, ny = node
        complete_ = frame.done(fs) and sp == pv and ny == len(ys)
        outputs[node] = a.outputs[q] if complete_ else a.bottom
        for x in letters:
            if x.pointers & sp or not x.pointers <= pv:
                continue
            fs2 = frame.step(fs, x)
            if fs2 is None:
                continue
            if x.var is not None:
                if x.var not in ys[ny:]:
                    continue
                if x.var != ys[ny] or any(is_aux(p) or p in blocked for p in x.pointers):
                    delta[(node, x)] = TOP_STATE
                    to_top = True
                    continue
            r = a.delta.get((q, x))
            if r is None:
                continue
            nxt = (r, fs2, sp | x.pointers, ny + (x.var is not None))
            delta[(node, x)] = nxt
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    if to_top:
        outputs[TOP_STATE] = lattice.TOP
        for x in letters:
            delta[(TOP_STATE, x)] = TOP_STATE
    b = a.with_(initial=start, delta=delta, outputs=outputs, alphabet=letters, pointers=pv,
                variables=ys)
    return minimize(trim(b))


# -- export --------------------------------------------------------------------

def to_dot(a: Qda, name: str = "qda") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    dead = dead_states(a)
    for q in a.outputs:
        if q in dead:
            continue
        label = str(a.outputs[q]).replace('"', '\\"')
        lines.append(f'  "{q}" [shape=box, label="{q}\\n{label}"];')
    lines.append(f'  __start -> "{a.initial}";')
    edges: dict[tuple, list[str]] = {}
    for (q, x), r in sorted(a.delta.items(), key=lambda kv: (str(kv[0][0]), kv[0][1].key())):
        if q in dead or r in dead:
            continue
        edges.setdefault((q, r), []).append(str(x))
    for (q, r), labels in edges.items():
        lines.append(f'  "{q}" -> "{r}" [label="{", ".join(labels)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(a: Qda, universe: Universe | None = None) -> str:
    states = list(a.outputs)
    num = {q: i for i, q in enumerate(states)}
    obj = {
        "initial": num[a.initial],
        "pointers": sorted(a.pointers),
        "variables": list(a.variables),
        "alphabet": [str(x) for x in a.alphabet],
        "outputs": [str(a.outputs[q]) for q in states],
        "transitions": [[num[q], str(x), num[r]]
                        for (q, x), r in sorted(a.delta.items(), key=lambda kv: (num[kv[0][0]], kv[0][1].key()))],
    }
    if universe is not None:
        obj["universe"] = [str(t) for t in universe.terms]
    return json.dumps(obj, indent=1)


def from_json(text: str) -> Qda:
    obj = json.loads(text)
    universe = None
    if "universe" in obj:
        universe = Universe([lattice.parse_term(t) for t in obj["universe"]])
    outputs = {i: lattice.parse(f, universe) for i, f in enumerate(obj["outputs"])}
    delta = {(q, parse_letter(x)): r for q, x, r in obj["transitions"]}
    return Qda(obj["initial"], delta, outputs,
               alphabet=[parse_letter(x) for x in obj.get("alphabet", [])],
               pointers=obj.get("pointers"), variables=obj.get("variables"))
