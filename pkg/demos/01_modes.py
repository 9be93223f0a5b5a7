"""Usage modes and how they compose.

A mode says how much a context needs the value of a variable. Composing the
mode of an outer context with that of an inner one gives the mode of the
innermost hole. Run with ``python3 demos/01_modes.py``.
"""
from recheck.modes import Mode, compose, env_compose, env_join

names = [str(m) for m in Mode]
width = max(map(len, names)) + 1

print("outer \\ inner".ljust(width + 4), *(n.ljust(width) for n in names))
for outer in Mode:
    print(str(outer).ljust(width + 4), *(str(compose(outer, inner)).ljust(width) for inner in Mode))

# A constructor argument inside a function body: the function delays
# everything, so the argument is only delayed.
print("\nguard inside delay:", compose(Mode.DELAY, Mode.GUARD))
# Pattern matching inspects its scrutinee, even inside a constructor.
print("dereference inside guard:", compose(Mode.GUARD, Mode.DEREFERENCE))

# Environments merge by pointwise maximum and compose entry by entry.
env = env_join({"xs": Mode.GUARD}, {"xs": Mode.DELAY, "f": Mode.RETURN})
print("\njoined:", {k: str(m) for k, m in env.items()})
print("under a guard:", {k: str(m) for k, m in env_compose(Mode.GUARD, env).items()})
