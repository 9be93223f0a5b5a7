"""``recheck`` command-line interface: check, infer, eval and fuzz."""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, TextIO, Tuple

from recheck.infer import Verdict, accepted, check_program, infer_term
from recheck.modes import Mode
from recheck.semantics import DEFAULT_MAX_STEPS, Status, Strategy, Trace, run
from recheck.syntax import ParseError, Term, line_col, parse, print_term
from recheck.testkit import GenConfig, gen_term, shrink

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3

DEFAULT_SEED = 0


def _read(path: str) -> Tuple[str, str]:
    if path == "-":
        return "<stdin>", sys.stdin.read()
    with open(path) as f:
        return path, f.read()


def _location(fname: str, source: str, span) -> str:
    if span is None:
        return fname
    line, col = line_col(source, span[0])
    return f"{fname}:{line}:{col}"


def _load(path: str, err: TextIO, allow_free: bool = False) -> Optional[Tuple[str, str, Term]]:
    try:
        fname, source = _read(path)
    except OSError as e:
        print(f"recheck: {e}", file=err)
        return None
    try:
        return fname, source, parse(source, allow_free=allow_free)
    except ParseError as e:
        for msg, span in e.diagnostics:
            print(f"{_location(fname, source, span)}: error: {msg}", file=err)
        return None


def verdict_lines(fname: str, source: str, verdicts: Sequence[Verdict]) -> List[str]:
    lines = []
    for v in verdicts:
        if v.accepted:
            names = ", ".join(x.name for x in v.names)
            lines.append(f"{_location(fname, source, v.names[0].span)}: accepted: {names}")
        for o in v.offenders:
            lines.append(
                f"{_location(fname, source, o.span)}: rejected: '{o.used.name}' used at mode {o.mode} "
                f"in definition of '{o.definition.name}' (must be guard or lower)"
            )
    return lines


def verdict_json(source: str, v: Verdict) -> dict:
    def pos(span):
        if span is None:
            return None
        line, col = line_col(source, span[0])
        return {"line": line, "col": col}

    return {
        "accepted": v.accepted,
        "names": [x.name for x in v.names],
        "offenders": [
            {"definition": o.definition.name, "variable": o.used.name, "mode": str(o.mode), "at": pos(o.span)}
            for o in v.offenders
        ],
    }


def env_json(env) -> dict:
    out = {}
    for x, m in sorted(env.items(), key=lambda kv: (kv[0].name, kv[0].uid)):
        key = x.name if x.name not in out else f"{x.name}#{x.uid}"
        out[key] = str(m)
    return out


def _dump(obj, out: TextIO) -> None:
    print(json.dumps(obj, sort_keys=True, indent=2), file=out)


# ---------------------------------------------------------------------------
# Commands


def cmd_check(args, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_PARSE
    fname, source, t = loaded
    verdicts = check_program(t)
    if args.json:
        _dump({"verdicts": [verdict_json(source, v) for v in verdicts]}, out)
    else:
        for line in verdict_lines(fname, source, verdicts):
            print(line, file=out)
    return EXIT_OK if all(v.accepted for v in verdicts) else EXIT_FAIL


def cmd_infer(args, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    loaded = _load(args.file, err, allow_free=True)
    if loaded is None:
        return EXIT_PARSE
    fname, source, t = loaded
    mode = Mode.parse(args.mode)
    env = infer_term(t, mode)
    verdicts = check_program(t)
    if args.json:
        _dump({"mode": str(mode), "env": env_json(env), "verdicts": [verdict_json(source, v) for v in verdicts]}, out)
    else:
        print(f"mode: {mode}", file=out)
        for name, m in env_json(env).items():
            print(f"{name}: {m}", file=out)
        for line in verdict_lines(fname, source, verdicts):
            print(line, file=out)
    return EXIT_OK if all(v.accepted for v in verdicts) else EXIT_FAIL


def cmd_eval(args, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    loaded = _load(args.file, err)
    if loaded is None:
        return EXIT_PARSE
    _, _, t = loaded
    trace = run(t, Strategy(args.strategy), args.seed, args.max_steps)
    for line in trace.lines()[:-1]:
        print(line, file=out)
    print(f"term: {print_term(trace.final)}", file=out)
    print(trace.lines()[-1], file=out)
    if trace.status is Status.NORMAL:
        return EXIT_OK
    if trace.status is Status.BUDGET:
        return EXIT_BUDGET
    return EXIT_FAIL


@dataclass
class FuzzResult:
    programs: int = 0
    traces: int = 0
    statuses: dict = field(default_factory=dict)
    counterexample: Optional[Term] = None
    shrunk: Optional[Term] = None
    trace: Optional[Trace] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


def fuzz_config(seed: int) -> GenConfig:
    return GenConfig(max_size=16, max_vars=0, letrec_width=3, seed=seed, recursive_bias=0.5, lambda_bias=0.5, program=True)


def trace_seed(seed: int, program: int, trace: int) -> int:
    return random.Random(f"{seed}:{program}:{trace}").getrandbits(32)


def vicious_trace(t: Term, seed: int, program: int, traces: int, max_steps: int) -> Optional[Trace]:
    for j in range(traces):
        tr = run(t, Strategy.RANDOM, trace_seed(seed, program, j), max_steps)
        if tr.status is Status.VICIOUS:
            return tr
    return None


def fuzz(
    programs: int = 1000,
    traces: int = 10,
    seed: int = DEFAULT_SEED,
    max_steps: int = DEFAULT_MAX_STEPS,
    limit: Mode = Mode.GUARD,
    cfg: Optional[GenConfig] = None,
) -> FuzzResult:
    """Run random traces of random accepted closed programs, looking for a vicious outcome.

    ``limit`` is the acceptance threshold handed to the checker; anything
    above ``Guard`` is a deliberately broken checker.
    """
    cfg = cfg or fuzz_config(seed)
    rng = random.Random(cfg.seed)
    result = FuzzResult()
    while result.programs < programs:
        t = gen_term(cfg, rng)
        if not accepted(t, limit):
            continue
        i = result.programs
        result.programs += 1
        for j in range(traces):
            tr = run(t, Strategy.RANDOM, trace_seed(seed, i, j), max_steps)
            result.traces += 1
            result.statuses[tr.status.value] = result.statuses.get(tr.status.value, 0) + 1
            if tr.status is Status.VICIOUS:
                result.counterexample = t

                def fails(u: Term) -> bool:
                    return accepted(u, limit) and vicious_trace(u, seed, i, traces, max_steps) is not None

                result.shrunk = shrink(t, fails)
                result.trace = vicious_trace(result.shrunk, seed, i, traces, max_steps)
                return result
    return result


def cmd_fuzz(args, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    limit = Mode.RETURN if args.inject_bug else Mode.GUARD
    res = fuzz(args.programs, args.traces, args.seed, args.max_steps, limit)
    summary = ", ".join(f"{k} {v}" for k, v in sorted(res.statuses.items()))
    print(f"fuzz: {res.programs} programs, {res.traces} traces ({summary or 'none'})", file=out)
    if res.ok:
        print("result: no vicious outcome", file=out)
        return EXIT_OK
    print("result: vicious outcome found", file=out)
    print(f"program: {print_term(res.counterexample)}", file=out)
    print(f"shrunk: {print_term(res.shrunk)}", file=out)
    for line in res.trace.lines():
        print(line, file=out)
    return EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="recheck", description="Check recursive value definitions.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="accept or reject every let rec group")
    c.add_argument("file", help="source file, or - for stdin")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)

    i = sub.add_parser("infer", help="print the least environment of a term")
    i.add_argument("file")
    i.add_argument("--mode", default="return", choices=[str(m) for m in Mode])
    i.add_argument("--json", action="store_true")
    i.set_defaults(func=cmd_infer)

    e = sub.add_parser("eval", help="run the reference interpreter")
    e.add_argument("file")
    e.add_argument("--strategy", default=Strategy.LOOKUP_LAST.value, choices=[s.value for s in Strategy])
    e.add_argument("--seed", type=int, default=DEFAULT_SEED)
    e.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    e.set_defaults(func=cmd_eval)

    f = sub.add_parser("fuzz", help="search for accepted programs that go vicious")
    f.add_argument("--programs", type=int, default=1000)
    f.add_argument("--traces", type=int, default=10)
    f.add_argument("--seed", type=int, default=DEFAULT_SEED)
    f.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    # test-only: weaken the acceptance check to Return
    f.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    f.set_defaults(func=cmd_fuzz)
    return p


def main(argv: Optional[Sequence[str]] = None, out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    args = build_parser().parse_args(argv)
    env_seed = os.environ.get("RECHECK_SEED")
    if env_seed is not None and hasattr(args, "seed"):
        args.seed = int(env_seed)
    if getattr(args, "max_steps", 0) < 0:
        print("recheck: --max-steps must be non-negative", file=err)
        return EXIT_PARSE
    return args.func(args, out, err)


if __name__ == "__main__":
    sys.exit(main())
