"""The reference interpreter.

Values bound by ``let rec`` stay in the context and are copied out by a
lookup step when needed. Runs stop at a value, at a budget, or at one of
the failure shapes: a mismatch (e.g. applying a constructor) or a vicious
term (a forced variable whose definition is not yet a value).
"""
from recheck.semantics import Strategy, run
from recheck.syntax import parse, print_term

CASES = [
    ("cyclic list, first element", "let rec ones = Cons(One, ones) in match ones with Cons(h, t) -> h", Strategy.LOOKUP_LAST),
    ("same, unfolding innermost first", "let rec ones = Cons(One, ones) in match ones with Cons(h, t) -> h", Strategy.LEFTMOST_INNERMOST),
    ("vicious self-inspection", "let rec x = match x with K -> K in x", Strategy.LOOKUP_LAST),
    ("self-reference with no forcing context", "let rec x = x in x", Strategy.LOOKUP_LAST),
    ("mismatch", "let rec pred = fun n -> match n with Succ(m) -> m in pred (pred (Succ(Zero)))", Strategy.LOOKUP_LAST),
]

for title, source, strategy in CASES:
    trace = run(parse(source), strategy, seed=0, max_steps=8)
    print(f"== {title} ({strategy.value})")
    print("  ", source)
    for line in trace.lines():
        print("   ", line)
    print("    final:", print_term(trace.final))
    print()
