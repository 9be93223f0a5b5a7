"""Right-to-left mode inference and the ``let rec`` acceptance check.

``infer_term(t, m)`` returns the least demanding environment under which
``t`` can be used at mode ``m``.  A recursive group is accepted when no
definition uses a mutually-defined name at a mode above ``Guard``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from recheck.modes import Mode, compose, env_compose, env_join
from recheck.syntax import App, Clause, Constr, Lam, LetRec, Match, Span, Term, Var, VarId, letrecs, subterms

ModeEnv = Dict[VarId, Mode]

Binding = Tuple[VarId, Term]


@dataclass(frozen=True)
class BindingAnalysis:
    names: Tuple[VarId, ...]
    # least solution of the transitive closure equations, one per name,
    # over variables bound outside the group
    outer_envs: Dict[VarId, ModeEnv]
    # mode_matrix[(x_i, x_j)]: how the definition of x_i uses x_j
    mode_matrix: Dict[Tuple[VarId, VarId], Mode]
    iterations: int

    def mode(self, i: VarId, j: VarId) -> Mode:
        return self.mode_matrix.get((i, j), Mode.IGNORE)


@dataclass(frozen=True)
class Offender:
    definition: VarId
    used: VarId
    mode: Mode
    span: Optional[Span]


@dataclass(frozen=True)
class Verdict:
    names: Tuple[VarId, ...]
    offenders: Tuple[Offender, ...]

    @property
    def accepted(self) -> bool:
        return not self.offenders


def infer_term(t: Term, m: Mode) -> ModeEnv:
    if isinstance(t, Var):
        return {} if m is Mode.IGNORE else {t.var: m}
    if isinstance(t, Lam):
        env = infer_term(t.body, compose(m, Mode.DELAY))
        env.pop(t.param, None)
        return env
    if isinstance(t, App):
        md = compose(m, Mode.DEREFERENCE)
        return env_join(infer_term(t.fn, md), infer_term(t.arg, md))
    if isinstance(t, Constr):
        mg = compose(m, Mode.GUARD)
        return env_join(*(infer_term(a, mg) for a in t.args))
    if isinstance(t, Match):
        return env_join(infer_term(t.scrutinee, compose(m, Mode.DEREFERENCE)), infer_handler(t.clauses, m))
    if isinstance(t, LetRec):
        analysis = infer_bindings(t.bindings)
        env = infer_term(t.body, m)
        # right-hand sides are evaluated even when the body discards them,
        # but only if the letrec itself is
        floor = compose(m, Mode.GUARD)
        parts = []
        for x in analysis.names:
            used = max(env.pop(x, Mode.IGNORE), floor)
            parts.append(env_compose(used, analysis.outer_envs[x]))
        return env_join(env, *parts)
    raise TypeError(f"not a term: {t!r}")


def infer_handler(clauses: Sequence[Clause], m: Mode) -> ModeEnv:
    envs = []
    for c in clauses:
        env = infer_term(c.body, m)
        for p in c.params:
            env.pop(p, None)
        envs.append(env)
    return env_join(*envs)


def infer_bindings(bindings: Sequence[Binding]) -> BindingAnalysis:
    names = tuple(x for x, _ in bindings)
    group = set(names)
    own: Dict[VarId, ModeEnv] = {}
    matrix: Dict[Tuple[VarId, VarId], Mode] = {}
    for x, rhs in bindings:
        env = infer_term(rhs, Mode.RETURN)
        for y in names:
            my = env.pop(y, Mode.IGNORE)
            if my is not Mode.IGNORE:
                matrix[(x, y)] = my
        own[x] = env
    assert all(not (group & env.keys()) for env in own.values())

    # Kleene iteration from the per-definition environments; each round
    # either raises some entry or stops, and entries only climb a 5-point chain.
    ambient = set().union(*own.values())
    bound = len(ambient) * 4 * len(names) + 1
    outer = {x: dict(own[x]) for x in names}
    iterations = 0
    while True:
        iterations += 1
        changed = False
        for x in names:
            new = env_join(own[x], *(env_compose(matrix.get((x, y), Mode.IGNORE), outer[y]) for y in names))
            if new != outer[x]:
                outer[x] = new
                changed = True
        if not changed:
            break
        assert iterations <= bound, "fixpoint iteration failed to converge"
    return BindingAnalysis(names, outer, matrix, iterations)


def _first_use(t: Term, x: VarId) -> Optional[Span]:
    for s in subterms(t):
        if isinstance(s, Var) and s.var == x:
            return s.var.span
    return None


def check_letrec(bindings: Sequence[Binding], limit: Mode = Mode.GUARD) -> Verdict:
    """Accept the group iff every mutual use is at ``limit`` or below.

    ``limit`` exists for mutation testing of the harness; the sound check is
    ``Guard``.
    """
    analysis = infer_bindings(bindings)
    offenders = []
    for x, rhs in bindings:
        for y in analysis.names:
            m = analysis.mode(x, y)
            if m > limit:
                offenders.append(Offender(x, y, m, _first_use(rhs, y)))
    return Verdict(analysis.names, tuple(offenders))


def check_program(t: Term, limit: Mode = Mode.GUARD) -> List[Verdict]:
    """One verdict per ``let rec`` group, in source order."""
    return [check_letrec(lr.bindings, limit) for lr in letrecs(t)]


def accepted(t: Term, limit: Mode = Mode.GUARD) -> bool:
    return all(v.accepted for v in check_program(t, limit))
