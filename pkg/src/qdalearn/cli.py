"""Command line entry point.

A session is either a named fixture or a JSON config file such as::

    {"pointers": ["head", "cur"], "scalars": ["k"], "structures": ["list"],
     "variables": 2, "data": [0, 3], "max_len": 4}

Verbs mirror the pipeline stages; ``check`` and ``bench`` exit 0 only when
every verdict is PASS.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .automaton import from_json, restrict_to_frame, to_dot, to_json
from .elastic import elastify, is_elastic
from .lattice import Universe, parse_term
from .pipeline import CHECKS, bench, learn_samples, live_size, run_pipeline
from .programs import FIXTURES, Bounds, Fixture
from .teacher import build_samples, default_variables
from .translate import NotElastic, emit_smtlib, to_apf, to_strand
from .words import Frame, read_traces, write_traces


@dataclass
class Session:
    pointers: tuple[str, ...]
    scalars: tuple[str, ...] = ()
    structures: tuple[str, ...] = ("list",)
    variables: int = 1
    arity: int = 1
    data: tuple[int, int] = (0, 3)
    max_len: int = 4
    pad: bool = False
    fixture: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def of_fixture(cls, f: Fixture) -> "Session":
        return cls(f.pointers, f.scalars, f.structures, f.n_vars, f.arity, f.train.data,
                   f.train.max_len, f.pad, f.name)

    @classmethod
    def load(cls, path: str) -> "Session":
        obj = json.loads(Path(path).read_text())
        known = {k: obj.pop(k) for k in list(obj) if k in cls.__dataclass_fields__}
        for k in ("pointers", "scalars", "structures", "data"):
            if k in known:
                known[k] = tuple(known[k])
        if "fixture" in known and "pointers" not in known:
            s = cls.of_fixture(FIXTURES[known.pop("fixture")])
            for k, v in known.items():
                setattr(s, k, v)
            return s
        return cls(**known, extra=obj)

    @property
    def ys(self) -> tuple[str, ...]:
        return default_variables(self.variables)

    @property
    def blocked(self) -> tuple[str, ...]:
        return () if self.pad else self.scalars

    @property
    def bounds(self) -> Bounds:
        return Bounds(self.max_len, tuple(self.data))

    def universe(self) -> Universe:
        return Universe.standard(self.ys, self.scalars, self.arity)


def _data_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _session(args) -> Session:
    if getattr(args, "config", None):
        s = Session.load(args.config)
    elif getattr(args, "fixture", None):
        s = Session.of_fixture(FIXTURES[args.fixture])
    else:
        raise SystemExit("need --fixture or --config")
    if getattr(args, "max_len", None) is not None:
        s.max_len = args.max_len
    if getattr(args, "data_range", None) is not None:
        s.data = args.data_range
    return s


def _out(args, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _read_qda(path: str):
    """The automaton and the term universe stored with it (if any)."""
    text = Path(path).read_text()
    terms = json.loads(text).get("universe")
    u = Universe([parse_term(t) for t in terms]) if terms else None
    return from_json(text), u


# -- verbs ----------------------------------------------------------------------


def cmd_gen_traces(args) -> int:
    s = _session(args)
    if s.fixture is None:
        raise SystemExit("gen-traces needs a fixture (the config names none)")
    configs = FIXTURES[s.fixture].traces(s.bounds)
    if args.output:
        with open(args.output, "w") as fh:
            n = write_traces(configs, fh)
    else:
        n = write_traces(configs, sys.stdout)
    print(f"{n} configurations", file=sys.stderr)
    return 0


def cmd_learn(args) -> int:
    s = _session(args)
    if args.traces:
        with open(args.traces) as fh:
            configs = read_traces(fh)
    elif s.fixture is not None:
        configs = FIXTURES[s.fixture].traces(s.bounds)
    else:
        raise SystemExit("learn needs --traces or a fixture")
    u = s.universe()
    samples = build_samples(configs, u, s.ys, canonical=True, blocked=s.blocked)
    h = learn_samples(samples, s.ys)
    h = restrict_to_frame(h, Frame(s.scalars, s.structures), s.pointers, s.ys, s.blocked)
    print(f"{len(configs)} configurations, {len(samples)} samples, "
          f"{live_size(h)} states, elastic: {is_elastic(h)}", file=sys.stderr)
    _out(args, to_json(h, u) + "\n")
    return 0


def cmd_elastify(args) -> int:
    a, u = _read_qda(args.qda)
    required = not is_elastic(a)
    e = elastify(a) if required else a
    print(f"elastification required: {'yes' if required else 'no'}, "
          f"{live_size(e)} states", file=sys.stderr)
    _out(args, to_json(e, u) + "\n")
    return 0


def cmd_translate(args) -> int:
    a, _ = _read_qda(args.qda)
    blocked = tuple(args.blocked.split(",")) if args.blocked else ()
    build = to_strand if args.flavor == "strand" else to_apf
    try:
        t = build(a, blocked=blocked)
    except NotElastic as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = emit_smtlib(t, args.flavor) if args.smtlib else str(t) + "\n"
    _out(args, text)
    if not t.inside_fragment:
        print("warning: outside the decidable fragment", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    f = FIXTURES[args.fixture]
    bounds = None
    if args.max_len is not None or args.data_range is not None:
        bounds = Bounds(args.max_len if args.max_len is not None else f.train.max_len,
                        args.data_range or f.train.data)
    r = run_pipeline(f, bounds, checks=args.checks or CHECKS)
    print("\n".join(r.lines(timings=not args.no_timings)))
    return 0 if r.ok else 1


def cmd_bench(args) -> int:
    unknown = [n for n in args.fixtures if n not in FIXTURES]
    if unknown:
        print(f"error: unknown fixtures {', '.join(unknown)}", file=sys.stderr)
        return 2
    text, reports = bench(args.fixtures or None, checks=args.checks or CHECKS,
                          timings=not args.no_timings)
    _out(args, text)
    return 0 if all(r.ok for r in reports) else 1


def cmd_dot(args) -> int:
    _out(args, to_dot(_read_qda(args.qda)[0]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdalearn", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def session_opts(q, fixture_required=False):
        g = q.add_mutually_exclusive_group(required=fixture_required)
        g.add_argument("--fixture", choices=sorted(FIXTURES))
        g.add_argument("--config", help="session config (JSON)")
        q.add_argument("--max-len", type=int)
        q.add_argument("--data-range", type=_data_range, metavar="LO:HI")

    q = sub.add_parser("gen-traces", help="write loop-head configurations as JSON lines")
    session_opts(q, True)
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_gen_traces)

    q = sub.add_parser("learn", help="learn a QDA from traces")
    session_opts(q, True)
    q.add_argument("--traces", help="JSON-lines file from gen-traces")
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_learn)

    q = sub.add_parser("elastify", help="elastify a QDA (JSON)")
    q.add_argument("qda")
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_elastify)

    q = sub.add_parser("translate", help="translate an elastic QDA to a formula")
    q.add_argument("qda")
    q.add_argument("--flavor", choices=("strand", "apf"), default="strand")
    q.add_argument("--smtlib", action="store_true", help="emit SMT-LIB instead of text")
    q.add_argument("--blocked", help="comma-separated cells universals never occupy")
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_translate)

    q = sub.add_parser("check", help="run the whole pipeline on a fixture")
    q.add_argument("--fixture", choices=sorted(FIXTURES), required=True)
    q.add_argument("--max-len", type=int, help="training length bound")
    q.add_argument("--data-range", type=_data_range, metavar="LO:HI")
    q.add_argument("--checks", nargs="*", choices=CHECKS)
    q.add_argument("--no-timings", action="store_true")
    q.set_defaults(run=cmd_check)

    q = sub.add_parser("bench", help="table of results over fixtures")
    q.add_argument("fixtures", nargs="*", metavar="FIXTURE", help="default: all")
    q.add_argument("--checks", nargs="*", choices=CHECKS)
    q.add_argument("--no-timings", action="store_true")
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_bench)

    q = sub.add_parser("dot", help="Graphviz rendering of a QDA (JSON)")
    q.add_argument("qda")
    q.add_argument("-o", "--output")
    q.set_defaults(run=cmd_dot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
