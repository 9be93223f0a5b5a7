"""Checking recursive definitions.

Each ``let rec`` group is accepted when every definition uses its siblings
at mode guard or below. Rejections name the definition, the variable and
the offending mode.
"""
from recheck.cli import verdict_lines
from recheck.infer import check_program, infer_bindings, infer_term
from recheck.modes import Mode
from recheck.syntax import parse

PROGRAMS = [
    # a cyclic list: the recursive use sits under a constructor
    "let rec ones = Cons(One, ones) in ones",
    # mutually recursive functions only delay each other
    "let rec even = fun n -> match n with Zero -> True | Succ(m) -> odd m\n"
    "and odd = fun n -> match n with Zero -> False | Succ(m) -> even m in even",
    # returning yourself has no meaningful value
    "let rec x = x in x",
    # inspecting yourself before you exist
    "let rec x = match x with Foo -> Foo in x",
    # aliasing a sibling is a return use, even if the sibling is a value
    "let rec xs = Cons(Zero, ys) and ys = xs in xs",
]

for source in PROGRAMS:
    print(source)
    for line in verdict_lines("demo", source, check_program(parse(source))):
        print("   ", line)
    print()

# The mode matrix behind a verdict.
t = parse("let rec xs = Cons(Zero, ys) and ys = Cons(Succ(Zero), xs) and f = fun u -> f xs in f")
analysis = infer_bindings(t.bindings)
print("mode matrix (definition uses name):")
for (x, y), m in analysis.mode_matrix.items():
    print(f"    {x.name} uses {y.name} at {m}")

# Inference works on open terms too: how does this term use its free variables?
open_term = parse("fun z -> Cons(y, f z)", allow_free=True)
for m in (Mode.RETURN, Mode.DEREFERENCE):
    env = infer_term(open_term, m)
    print(f"\nat {m}:", {x.name: str(mode) for x, mode in env.items()})
