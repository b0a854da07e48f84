"""Teachers for the learner.

``SampleTeacher`` answers from a finite set of formula words collected from
program configurations: membership returns the stored formula (bottom for
unseen words) and equivalence checks that every sample is contained in the
hypothesis.  ``ExactTeacher`` wraps a known target machine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .automaton import Qda, moore_counterexample, registers_of
from .lattice import BOTTOM, DataFormula, Universe, abstract, join, leq
from .words import (
    BLANK, Letter, ProgramConfig, canonical_valuations, encode_config, symbolic, valuations,
)


def default_variables(n: int) -> tuple[str, ...]:
    return tuple(f"y{i + 1}" for i in range(n))


@dataclass
class SampleSet:
    formulas: dict[tuple, DataFormula] = field(default_factory=dict)
    counts: dict[tuple, int] = field(default_factory=dict)
    configs: int = 0

    def __len__(self) -> int:
        return len(self.formulas)

    def __contains__(self, w) -> bool:
        return tuple(w) in self.formulas

    def __getitem__(self, w) -> DataFormula:
        return self.formulas[tuple(w)]

    def add(self, w: tuple, f: DataFormula) -> None:
        self.formulas[w] = join(self.formulas.get(w, BOTTOM), f)
        self.counts[w] = self.counts.get(w, 0) + 1

    def add_config(self, c: ProgramConfig, universe: Universe, variables: Sequence[str], *,
                   canonical: bool = False, blocked: Iterable[str] = ()) -> None:
        """Add one formula word per valuation of ``c``.

        With ``canonical`` only ordered placements over cells that are neither
        auxiliary nor ``blocked`` are used.
        """
        w = encode_config(c)
        self.configs += 1
        if len(w) < len(variables):
            return
        vals = canonical_valuations(w, variables, blocked) if canonical else valuations(w, variables)
        for v in vals:
            self.add(symbolic(v), abstract(registers_of(v), universe))

    def letters(self) -> set[Letter]:
        return {x for w in self.formulas for x in w}

    def keys_shortlex(self) -> list[tuple]:
        return sorted(self.formulas, key=lambda w: (len(w), tuple(x.key() for x in w)))


def build_samples(configs: Iterable[ProgramConfig], universe: Universe,
                  variables: Sequence[str], *, canonical: bool = False,
                  blocked: Iterable[str] = ()) -> SampleSet:
    s = SampleSet()
    blocked = tuple(blocked)
    for c in configs:
        s.add_config(c, universe, variables, canonical=canonical, blocked=blocked)
    return s


def membership(s: SampleSet, w) -> DataFormula:
    return s.formulas.get(tuple(w), BOTTOM)


def equivalence(s: SampleSet, h: Qda) -> tuple | None:
    """Shortest sample word (then least) whose formula is not below the hypothesis output."""
    for w in s.keys_shortlex():
        if not leq(s.formulas[w], h.output_of(w)):
            return w
    return None


def learner_alphabet(s: SampleSet, variables: Sequence[str]) -> list[Letter]:
    letters = s.letters() | {BLANK} | {Letter(frozenset(), y) for y in variables}
    return sorted(letters)


class SampleTeacher:
    bottom = BOTTOM

    def __init__(self, samples: SampleSet):
        self.samples = samples

    def membership(self, w) -> DataFormula:
        return membership(self.samples, w)

    def equivalence(self, h: Qda):
        return equivalence(self.samples, h)


class ExactTeacher:
    """Answers from a target machine; equivalence compares outputs on all words."""

    def __init__(self, target: Qda, alphabet: Iterable[Letter] | None = None):
        self.target = target
        self.bottom = target.bottom
        self.alphabet = tuple(sorted(alphabet if alphabet is not None else target.alphabet))

    def membership(self, w):
        return self.target.output_of(w)

    def equivalence(self, h: Qda):
        return moore_counterexample(h, self.target, self.alphabet)


def samples_from_words(entries: Mapping[tuple, DataFormula]) -> SampleSet:
    s = SampleSet()
    for w, f in entries.items():
        s.add(tuple(w), f)
    return s
