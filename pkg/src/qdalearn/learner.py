"""Active learning of Moore machines from membership and equivalence queries.

The observation table maps every word in ``(S ∪ S·Σ)·E`` to the teacher's
output.  Counterexamples are processed by adding all their prefixes to ``S``.
The learner only needs outputs to be hashable and comparable for equality, so
it works for any finite output alphabet, the QDA case being one instance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Protocol, Sequence

from .automaton import Qda
from .lattice import BOTTOM
from .words import Letter

log = logging.getLogger(__name__)

Word = tuple  # tuple[Letter, ...]


class TeacherInconsistent(RuntimeError):
    """The teacher returned a counterexample the hypothesis already agrees with."""


class Teacher(Protocol):
    bottom: Any

    def membership(self, w: Word) -> Hashable: ...

    def equivalence(self, h: Qda) -> Word | None: ...


@dataclass
class LearnStats:
    membership: int = 0
    equivalence: int = 0
    longest_cex: int = 0
    counterexamples: list[int] = field(default_factory=list)


def _shortlex(w: Word) -> tuple:
    return (len(w), tuple(x.key() for x in w))


class ObservationTable:
    def __init__(self, alphabet: Sequence[Letter], query: Callable[[Word], Hashable]):
        self.alphabet = tuple(sorted(alphabet))
        self.query = query
        self.S: list[Word] = [()]
        self.E: list[Word] = [()]
        self._s_set = {()}
        self._e_set = {()}

    def row(self, u: Word) -> tuple:
        return tuple(self.query(u + e) for e in self.E)

    def add_prefixes(self, w: Word) -> None:
        for i in range(len(w) + 1):
            u = tuple(w[:i])
            if u not in self._s_set:
                self._s_set.add(u)
                self.S.append(u)

    def add_suffix(self, e: Word) -> None:
        if e not in self._e_set:
            self._e_set.add(e)
            self.E.append(e)

    def unclosed(self) -> Word | None:
        """Least extension ``s·a`` whose row matches no row of ``S``."""
        rows = {self.row(s) for s in self.S}
        for s in sorted(self.S, key=_shortlex):
            for a in self.alphabet:
                if self.row(s + (a,)) not in rows:
                    return s + (a,)
        return None

    def inconsistency(self) -> Word | None:
        """A suffix ``a·e`` separating two equal rows of ``S``, or None."""
        by_row: dict[tuple, list[Word]] = {}
        for s in sorted(self.S, key=_shortlex):
            by_row.setdefault(self.row(s), []).append(s)
        for group in by_row.values():
            first = group[0]
            for other in group[1:]:
                for a in self.alphabet:
                    for e in self.E:
                        if self.query(first + (a,) + e) != self.query(other + (a,) + e):
                            return (a,) + e
        return None

    def hypothesis(self, bottom: Any = BOTTOM, **qda_kw) -> Qda:
        reps: dict[tuple, Word] = {}
        for s in sorted(self.S, key=_shortlex):
            reps.setdefault(self.row(s), s)
        num = {r: i for i, r in enumerate(reps)}
        delta = {}
        outputs = {}
        for r, s in reps.items():
            outputs[num[r]] = self.query(s)
            for a in self.alphabet:
                delta[(num[r], a)] = num[self.row(s + (a,))]
        return Qda(num[self.row(())], delta, outputs, alphabet=self.alphabet, bottom=bottom,
                   **qda_kw)


def learn(teacher: Teacher, alphabet: Iterable[Letter], *, max_rounds: int = 10_000,
          pointers: Iterable[str] | None = None, variables: Iterable[str] | None = None,
          stats: LearnStats | None = None) -> Qda:
    """Learn a total Moore machine whose outputs agree with the teacher on every query."""
    stats = stats if stats is not None else LearnStats()
    cache: dict[Word, Hashable] = {}

    def query(w: Word) -> Hashable:
        if w not in cache:
            cache[w] = teacher.membership(w)
            stats.membership += 1
        return cache[w]

    table = ObservationTable(alphabet, query)
    bottom = getattr(teacher, "bottom", BOTTOM)
    kw = {}
    if pointers is not None:
        kw["pointers"] = pointers
    if variables is not None:
        kw["variables"] = variables
    for _ in range(max_rounds):
        while True:
            ext = table.unclosed()
            if ext is not None:
                table.add_prefixes(ext)
                continue
            sep = table.inconsistency()
            if sep is not None:
                table.add_suffix(sep)
                continue
            break
        h = table.hypothesis(bottom, **kw)
        stats.equivalence += 1
        cex = teacher.equivalence(h)
        if cex is None:
            log.info("converged: %d states, %d membership, %d equivalence queries",
                     len(h), stats.membership, stats.equivalence)
            return h
        cex = tuple(cex)
        if query(cex) == h.output_of(cex):
            raise TeacherInconsistent(f"counterexample of length {len(cex)} is not one")
        stats.counterexamples.append(len(cex))
        stats.longest_cex = max(stats.longest_cex, len(cex))
        table.add_prefixes(cex)
    raise RuntimeError("learning did not converge within the round limit")
