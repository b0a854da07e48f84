"""End-to-end runs: traces, samples, learning, elastification, translation, checks.

The learned hypothesis is cut down to well-formed encodings before its size
and elasticity are measured (see :func:`automaton.restrict_to_frame`).
"""

from __future__ import annotations

import time
from math import prod
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automaton import Acceptor, Qda, restrict_to_frame, trim
from .checker import enumerate_models, evaluator
from .elastic import elastify, is_elastic
from .learner import LearnStats, learn
from .programs import FIXTURES, Bounds, Fixture, model_bound
from .teacher import SampleSet, build_samples, equivalence, learner_alphabet
from .translate import Translation, normalize, to_apf, to_strand
from .words import encode_config

CHECKS = ("containment", "generalization", "translation")


def live_size(a: Qda) -> int:
    """Number of states that can still lead to a non-bottom output."""
    return len(trim(a))


@dataclass
class Report:
    name: str
    configs: int = 0
    samples: int = 0
    membership: int = 0
    equivalence: int = 0
    learned_states: int = 0
    elastify_required: bool = False
    final_states: int = 0
    reference_states: int | None = None
    reference_elastify: bool | None = None
    t_teacher: float = 0.0
    t_learn: float = 0.0
    t_checks: float = 0.0
    inside_fragment: bool = True
    strand: str = ""
    apf: str = ""
    verdicts: dict[str, bool] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)
    # artifacts, not part of the text report
    samples_set: SampleSet | None = field(default=None, repr=False)
    learned: Qda | None = field(default=None, repr=False)
    final: Qda | None = field(default=None, repr=False)
    normalized: Qda | None = field(default=None, repr=False)
    strand_t: Translation | None = field(default=None, repr=False)
    apf_t: Translation | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def lines(self, timings: bool = True) -> list[str]:
        out = [f"fixture {self.name}",
               f"  configs {self.configs}  samples {self.samples}",
               f"  queries  eq {self.equivalence}  mem {self.membership}",
               f"  states   learned {self.learned_states}  final {self.final_states}"
               f"  (reference: {self.reference_states})",
               f"  elastification required {_yn(self.elastify_required)}"
               f"  (reference: {_yn(self.reference_elastify)})",
               f"  inside decidable fragment {_yn(self.inside_fragment)}"]
        if timings:
            out.append(f"  time     teacher {self.t_teacher:.2f}s  learn {self.t_learn:.2f}s"
                       f"  checks {self.t_checks:.2f}s")
        for k, v in self.verdicts.items():
            note = f"  ({self.notes[k]})" if k in self.notes else ""
            out.append(f"  {'PASS' if v else 'FAIL'} {k}{note}")
        return out


def _yn(b: bool | None) -> str:
    return "-" if b is None else ("yes" if b else "no")


def learn_fixture(f: Fixture, bounds: Bounds | None = None, report: Report | None = None) -> Report:
    """Traces to elastic automaton, with counts and timings."""
    r = report or Report(f.name, reference_states=f.reference_states, reference_elastify=f.reference_elastify)
    t0 = time.perf_counter()
    traces = f.traces(bounds)
    s = build_samples(traces, f.universe(), f.variables, canonical=True, blocked=f.blocked)
    t1 = time.perf_counter()
    stats = LearnStats()
    h = learn_samples(s, f.variables, stats)
    h = restrict_to_frame(h, f.frame, f.pointers, f.variables, f.blocked)
    r.elastify_required = not is_elastic(h)
    e = elastify(h) if r.elastify_required else h
    t2 = time.perf_counter()
    r.configs, r.samples = len(traces), len(s)
    r.membership, r.equivalence = stats.membership, stats.equivalence
    r.learned_states, r.final_states = live_size(h), live_size(e)
    r.t_teacher, r.t_learn = t1 - t0, t2 - t1
    r.samples_set, r.learned, r.final = s, h, e
    return r


def learn_samples(s: SampleSet, variables: Sequence[str], stats: LearnStats | None = None) -> Qda:
    from .teacher import SampleTeacher

    return learn(SampleTeacher(s), learner_alphabet(s, variables), variables=variables,
                 stats=stats)


def translate_fixture(f: Fixture, r: Report) -> Report:
    n = normalize(r.final, f.blocked)
    r.normalized = n
    r.strand_t = to_strand(n, normalized=True)
    r.apf_t = to_apf(n, normalized=True)
    r.strand, r.apf = str(r.strand_t), str(r.apf_t)
    r.inside_fragment = r.strand_t.inside_fragment
    return r


def containment_check(r: Report) -> bool:
    """Every sample sits below the learned and the final automaton (checked afresh)."""
    return equivalence(r.samples_set, r.learned) is None and \
        equivalence(r.samples_set, r.final) is None


def generalization_check(f: Fixture, r: Report, test: Bounds | None = None) -> tuple[bool, str]:
    """The final automaton accepts every loop-head configuration at the test bounds."""
    acc = Acceptor(r.normalized, f.variables)
    test = test or f.test
    n = 0
    if f.families is not None:
        for fam in f.families(test):
            w, doms = fam.word()
            if not acc.accepts_all(w, doms):
                bad = next(c for c in fam.members() if not acc(encode_config(c)))
                return False, f"rejects {bad}"
            n += prod(len(d) for d in fam.cells)
        return True, f"{n} configs"
    for c in f.traces(test):
        n += 1
        if not acc(encode_config(c)):
            return False, f"rejects {c}"
    return True, f"{n} configs"


def translation_check(f: Fixture, r: Report, bounds: Bounds | None = None,
               models: Iterable | None = None) -> tuple[bool, str]:
    """Automaton acceptance versus the translations on every bounded model.

    STRAND must agree in both directions; APF must accept whatever the
    automaton accepts.
    """
    acc = Acceptor(r.normalized, f.variables)
    strand = evaluator(r.strand_t.formula)
    apf = evaluator(r.apf_t.formula)
    if models is None:
        models = enumerate_models(model_bound(f, bounds or f.check_bounds))
    n = 0
    for c in models:
        n += 1
        w = encode_config(c)
        a, s = acc(w), strand(w)
        if a != s:
            return False, f"strand {'misses' if a else 'adds'} {c}"
        if a and not apf(w):
            return False, f"apf misses {c}"
    return True, f"{n} models"


def run_pipeline(f: Fixture | str, bounds: Bounds | None = None,
                 checks: Sequence[str] = CHECKS) -> Report:
    if isinstance(f, str):
        f = FIXTURES[f]
    r = learn_fixture(f, bounds)
    translate_fixture(f, r)
    t0 = time.perf_counter()
    if "containment" in checks:
        r.verdicts["containment"] = containment_check(r)
    if "generalization" in checks:
        ok, note = generalization_check(f, r)
        r.verdicts["generalization"], r.notes["generalization"] = ok, note
    if "translation" in checks:
        ok, note = translation_check(f, r)
        r.verdicts["translation"], r.notes["translation"] = ok, note
    r.t_checks = time.perf_counter() - t0
    return r


HEADER = ("fixture", "#configs", "#samples", "#eq", "#mem", "learned", "final", "ref",
          "elastify", "ref", "t_teach", "t_learn", "checks")


def bench(names: Iterable[str] | None = None, checks: Sequence[str] = CHECKS,
          timings: bool = True) -> tuple[str, list[Report]]:
    """Results table, one row per fixture, plus the reports."""
    reports = [run_pipeline(FIXTURES[n], checks=checks) for n in (names or FIXTURES)]
    return format_table(reports, timings), reports


def format_table(reports: Sequence[Report], timings: bool = True) -> str:
    header = list(HEADER)
    if not timings:
        header = [h for h in header if not h.startswith("t_")]
    rows = [header]
    for r in reports:
        row = [r.name, str(r.configs), str(r.samples), str(r.equivalence), str(r.membership),
               str(r.learned_states), str(r.final_states), str(r.reference_states),
               _yn(r.elastify_required), _yn(r.reference_elastify)]
        if timings:
            row += [f"{r.t_teacher:.2f}", f"{r.t_learn:.2f}"]
        row.append(",".join(f"{k}={'PASS' if v else 'FAIL'}" for k, v in r.verdicts.items())
                   or "-")
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                     for row in rows) + "\n"
