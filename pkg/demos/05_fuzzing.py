"""Fuzzing the soundness claim.

Random closed programs that the checker accepts are run under random
evaluation orders; none may go vicious. Turning the check off entirely shows
that the harness does notice unsound programs, and the shrinker reduces the
counterexample.
"""
import time

from recheck.cli import fuzz
from recheck.modes import Mode
from recheck.syntax import print_term

for label, limit in [("checker as specified", Mode.GUARD), ("relaxed to return", Mode.RETURN), ("check disabled", Mode.DEREFERENCE)]:
    start = time.perf_counter()
    res = fuzz(programs=200, traces=10, seed=0, limit=limit)
    print(f"== {label}: {res.programs} programs, {res.traces} traces in {time.perf_counter() - start:.1f}s")
    print("   outcomes:", dict(sorted(res.statuses.items())))
    if not res.ok:
        print("   counterexample:", print_term(res.counterexample))
        print("   shrunk:        ", print_term(res.shrunk))
        for line in res.trace.lines():
            print("     ", line)
