"""Safety checking of recursive value definitions for a core ML language."""
from recheck.modes import Mode, compose, env_compose, env_join, env_le, mode_le
from recheck.syntax import (
    App,
    Clause,
    Constr,
    Lam,
    LetRec,
    Match,
    ParseError,
    Var,
    VarId,
    free_vars,
    parse,
    print_term,
    rename_unique,
)

__all__ = [
    "App", "Clause", "Constr", "Lam", "LetRec", "Match", "Mode", "ParseError", "Var", "VarId",
    "compose", "env_compose", "env_join", "env_le", "free_vars", "mode_le", "parse",
    "print_term", "rename_unique",
]
