"""Small-step reference semantics with value bindings kept in the context.

A term is decomposed into an evaluation context (a stack of frames, outermost
first) and a focused subterm. Reduction is non-deterministic: both sides of an
application, every constructor argument, the scrutinee of a match and any
right-hand side of a ``let rec`` still under evaluation are valid positions.
Variables are replaced by their value through *lookup* in the value bindings
of the enclosing context.
"""
from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from recheck.syntax import (
    App,
    Clause,
    Constr,
    Lam,
    LetRec,
    Match,
    Term,
    Var,
    VarId,
    max_uid,
    print_term,
    size,
    substitute,
)

# ---------------------------------------------------------------------------
# Values


class ValueClass(enum.Enum):
    VALUE = "value"
    WEAK = "weak"  # a variable
    NEITHER = "neither"


def classify_value(t: Term) -> ValueClass:
    if isinstance(t, Var):
        return ValueClass.WEAK
    if is_value(t):
        return ValueClass.VALUE
    return ValueClass.NEITHER


def is_value(t: Term) -> bool:
    if isinstance(t, Lam):
        return True
    if isinstance(t, Constr):
        return all(isinstance(a, Var) or is_value(a) for a in t.args)
    return False


def is_weak_value(t: Term) -> bool:
    return isinstance(t, Var) or is_value(t)


def is_value_bindings(bindings) -> bool:
    return all(is_value(rhs) for _, rhs in bindings)


# ---------------------------------------------------------------------------
# Frames


@dataclass(frozen=True)
class AppFun:
    arg: Term

    def plug(self, t: Term) -> Term:
        return App(t, self.arg)

    def describe(self) -> str:
        return "app.fn"


@dataclass(frozen=True)
class AppArg:
    fn: Term

    def plug(self, t: Term) -> Term:
        return App(self.fn, t)

    def describe(self) -> str:
        return "app.arg"


@dataclass(frozen=True)
class ConstrArg:
    tag: str
    left: Tuple[Term, ...]
    right: Tuple[Term, ...]

    def plug(self, t: Term) -> Term:
        return Constr(self.tag, self.left + (t,) + self.right)

    def describe(self) -> str:
        return f"constr[{len(self.left)}]"


@dataclass(frozen=True)
class MatchScrut:
    clauses: Tuple[Clause, ...]

    def plug(self, t: Term) -> Term:
        return Match(t, self.clauses)

    def describe(self) -> str:
        return "match"


@dataclass(frozen=True)
class LetRecDef:
    left: Tuple[Tuple[VarId, Term], ...]
    name: VarId
    right: Tuple[Tuple[VarId, Term], ...]
    body: Term

    def plug(self, t: Term) -> Term:
        return LetRec(self.left + ((self.name, t),) + self.right, self.body)

    def describe(self) -> str:
        return f"letrec.def[{self.name.name}]"

    def lookup(self, x: VarId) -> Optional[Term]:
        for y, rhs in self.left + self.right:
            if y == x and is_value(rhs):
                return rhs
        return None


@dataclass(frozen=True)
class LetRecBody:
    bindings: Tuple[Tuple[VarId, Term], ...]

    def plug(self, t: Term) -> Term:
        return LetRec(self.bindings, t)

    def describe(self) -> str:
        return "letrec.body"

    def lookup(self, x: VarId) -> Optional[Term]:
        for y, rhs in self.bindings:
            if y == x:
                return rhs
        return None


Frame = Union[AppFun, AppArg, ConstrArg, MatchScrut, LetRecDef, LetRecBody]
Path = Tuple[Frame, ...]


def plug(path: Sequence[Frame], t: Term) -> Term:
    for frame in reversed(path):
        t = frame.plug(t)
    return t


def describe_path(path: Sequence[Frame]) -> str:
    return ".".join(f.describe() for f in path) or "root"


def positions(t: Term, path: Path = ()) -> List[Tuple[Path, Term]]:
    """Every (context, focus) decomposition, innermost-first, left to right."""
    out: List[Tuple[Path, Term]] = []
    _positions(t, path, out)
    return out


def _positions(t: Term, path: Path, out: List[Tuple[Path, Term]]) -> None:
    if isinstance(t, App):
        _positions(t.fn, path + (AppFun(t.arg),), out)
        _positions(t.arg, path + (AppArg(t.fn),), out)
    elif isinstance(t, Constr):
        for i, a in enumerate(t.args):
            _positions(a, path + (ConstrArg(t.tag, t.args[:i], t.args[i + 1:]),), out)
    elif isinstance(t, Match):
        _positions(t.scrutinee, path + (MatchScrut(t.clauses),), out)
    elif isinstance(t, LetRec):
        if is_value_bindings(t.bindings):
            _positions(t.body, path + (LetRecBody(t.bindings),), out)
        else:
            bs = t.bindings
            for i, (x, rhs) in enumerate(bs):
                _positions(rhs, path + (LetRecDef(bs[:i], x, bs[i + 1:], t.body),), out)
    out.append((path, t))


# ---------------------------------------------------------------------------
# Reduction


class RedexKind(enum.Enum):
    BETA = "beta"
    MATCH = "match"
    LOOKUP = "lookup"


@dataclass(frozen=True)
class Redex:
    path: Path
    kind: RedexKind
    var: Optional[VarId] = None
    value: Optional[Term] = None

    def describe(self) -> str:
        what = self.kind.value if self.var is None else f"lookup {self.var.name}"
        return f"{what} at {describe_path(self.path)}"


def _select_clause(scrut: Constr, clauses: Sequence[Clause]) -> Optional[Clause]:
    for c in clauses:
        if c.tag == scrut.tag and len(c.params) == len(scrut.args):
            return c
    return None


def head_step(t: Term, fresh: Optional[Iterator[int]] = None) -> Optional[Term]:
    """Contract a head redex: beta with a value argument, or a match on a constructor."""
    if fresh is None:
        fresh = itertools.count(max_uid(t) + 1)
    if isinstance(t, App) and isinstance(t.fn, Lam) and is_value(t.arg):
        return substitute(t.fn.body, {t.fn.param.uid: t.arg}, fresh)
    if isinstance(t, Match) and isinstance(t.scrutinee, Constr) and is_value(t.scrutinee):
        c = _select_clause(t.scrutinee, t.clauses)
        if c is not None:
            return substitute(c.body, {p.uid: w for p, w in zip(c.params, t.scrutinee.args)}, fresh)
    return None


def _head_kind(t: Term) -> Optional[RedexKind]:
    if isinstance(t, App) and isinstance(t.fn, Lam) and is_value(t.arg):
        return RedexKind.BETA
    if isinstance(t, Match) and isinstance(t.scrutinee, Constr) and is_value(t.scrutinee):
        if _select_clause(t.scrutinee, t.clauses) is not None:
            return RedexKind.MATCH
    return None


def lookup(x: VarId, path: Sequence[Frame]) -> Optional[Term]:
    """Value bound to ``x`` by the nearest binding frame of ``path`` that has one."""
    for frame in reversed(path):
        if isinstance(frame, (LetRecBody, LetRecDef)):
            v = frame.lookup(x)
            if v is not None:
                return v
    return None


def enumerate_redexes(t: Term) -> List[Redex]:
    out = []
    for path, focus in positions(t):
        kind = _head_kind(focus)
        if kind is not None:
            out.append(Redex(path, kind))
        elif isinstance(focus, Var):
            v = lookup(focus.var, path)
            if v is not None:
                out.append(Redex(path, RedexKind.LOOKUP, focus.var, v))
    return out


def contract(t: Term, redex: Redex, fresh: Optional[Iterator[int]] = None) -> Term:
    if fresh is None:
        fresh = itertools.count(max_uid(t) + 1)
    focus = t
    for frame in redex.path:
        focus = _descend(focus, frame)
    if redex.kind is RedexKind.LOOKUP:
        new = substitute(focus, {redex.var.uid: redex.value}, fresh)
    else:
        new = head_step(focus, fresh)
        assert new is not None
    return plug(redex.path, new)


def _descend(t: Term, frame: Frame) -> Term:
    if isinstance(frame, AppFun):
        return t.fn
    if isinstance(frame, AppArg):
        return t.arg
    if isinstance(frame, ConstrArg):
        return t.args[len(frame.left)]
    if isinstance(frame, MatchScrut):
        return t.scrutinee
    if isinstance(frame, LetRecDef):
        return t.bindings[len(frame.left)][1]
    return t.body


# ---------------------------------------------------------------------------
# Outcomes


@dataclass(frozen=True)
class Stepped:
    term: Term
    redex: Redex


@dataclass(frozen=True)
class Normal:
    value: Term


@dataclass(frozen=True)
class Mismatch:
    path: Path
    head: Term  # the stuck ``H[v]``


@dataclass(frozen=True)
class Vicious:
    path: Path
    var: VarId


@dataclass(frozen=True)
class StuckOther:
    description: str


StepOutcome = Union[Stepped, Normal, Mismatch, Vicious, StuckOther]


def strip_value_bindings(t: Term) -> Term:
    while isinstance(t, LetRec) and is_value_bindings(t.bindings):
        t = t.body
    return t


def is_forcing(path: Sequence[Frame]) -> bool:
    """Whether ``path`` is ``L`` or ``E[F[L]]`` with ``F`` a forcing frame and ``L`` value bindings."""
    k = len(path)
    while k and isinstance(path[k - 1], LetRecBody):
        k -= 1
    if k == 0:
        return True
    f = path[k - 1]
    if isinstance(f, MatchScrut):
        return True
    if isinstance(f, AppFun):
        return is_value(f.arg)
    if isinstance(f, AppArg):
        return is_value(f.fn)
    return False


def _is_mismatch(focus: Term) -> bool:
    if isinstance(focus, App):
        return is_value(focus.fn) and is_value(focus.arg) and not isinstance(focus.fn, Lam)
    if isinstance(focus, Match):
        return is_value(focus.scrutinee) and _head_kind(focus) is None
    return False


def vicious_positions(t: Term) -> List[Vicious]:
    return [
        Vicious(path, focus.var)
        for path, focus in positions(t)
        if isinstance(focus, Var) and is_forcing(path) and lookup(focus.var, path) is None
    ]


def mismatch_positions(t: Term) -> List[Mismatch]:
    return [Mismatch(path, focus) for path, focus in positions(t) if _is_mismatch(focus)]


def classify_stuck(t: Term) -> StepOutcome:
    """Classify a term with no redex. Vicious positions are reported before mismatches."""
    core = strip_value_bindings(t)
    if is_value(core):
        return Normal(t)
    vicious = vicious_positions(t)
    if vicious:
        return vicious[0]
    mismatches = mismatch_positions(t)
    if mismatches:
        return mismatches[0]
    return StuckOther(f"no redex in {print_term(t)}")


# ---------------------------------------------------------------------------
# Strategies and runs


class Strategy(enum.Enum):
    RANDOM = "random"
    LEFTMOST_INNERMOST = "leftmost-innermost"
    LOOKUP_LAST = "lookup-last"


DEFAULT_STRATEGY = Strategy.LOOKUP_LAST
DEFAULT_MAX_STEPS = 200
# terms that outgrow this many nodes count as budget exhaustion
DEFAULT_MAX_SIZE = 400


def choose(redexes: Sequence[Redex], strategy: Strategy, rng: random.Random) -> Redex:
    if strategy is Strategy.RANDOM:
        return redexes[rng.randrange(len(redexes))]
    if strategy is Strategy.LOOKUP_LAST:
        heads = [r for r in redexes if r.kind is not RedexKind.LOOKUP]
        return (heads or redexes)[0]
    return redexes[0]


def step(
    t: Term,
    strategy: Strategy = DEFAULT_STRATEGY,
    rng_seed: Union[int, random.Random] = 0,
    fresh: Optional[Iterator[int]] = None,
) -> StepOutcome:
    """One reduction step, or the final classification when there is none to take.

    A value (possibly under value bindings) is final even though lookups
    inside its weak positions could keep unfolding it.
    """
    if is_value(strip_value_bindings(t)):
        return Normal(t)
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    redexes = enumerate_redexes(t)
    if not redexes:
        return classify_stuck(t)
    r = choose(redexes, Strategy(strategy), rng)
    return Stepped(contract(t, r, fresh), r)


class Status(enum.Enum):
    NORMAL = "normal"
    MISMATCH = "mismatch"
    VICIOUS = "vicious"
    STUCK = "stuck"
    BUDGET = "budget"


_STATUS = {Normal: Status.NORMAL, Mismatch: Status.MISMATCH, Vicious: Status.VICIOUS, StuckOther: Status.STUCK}


@dataclass
class Trace:
    initial: Term
    steps: List[Stepped] = field(default_factory=list)
    outcome: Optional[StepOutcome] = None  # None when the budget ran out
    final: Optional[Term] = None

    @property
    def status(self) -> Status:
        return Status.BUDGET if self.outcome is None else _STATUS[type(self.outcome)]

    def terms(self) -> Iterator[Term]:
        yield self.initial
        for s in self.steps:
            yield s.term

    def lines(self) -> List[str]:
        out = [f"step {n}: {s.redex.describe()}" for n, s in enumerate(self.steps, 1)]
        out.append(f"result: {self.status.value}")
        return out


def run(
    t: Term,
    strategy: Strategy = DEFAULT_STRATEGY,
    seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    max_size: int = DEFAULT_MAX_SIZE,
) -> Trace:
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    rng = random.Random(seed)
    trace = Trace(t)
    cur = t
    # uids only grow along a run, so one counter serves every step
    fresh = itertools.count(max_uid(t) + 1)
    for _ in range(max_steps):
        out = step(cur, strategy, rng, fresh)
        if not isinstance(out, Stepped):
            trace.outcome = out
            break
        trace.steps.append(out)
        cur = out.term
        if size(cur) > max_size:
            break
    else:
        # budget exhausted; still report a final classification if nothing is left to do
        if is_value(strip_value_bindings(cur)) or not enumerate_redexes(cur):
            trace.outcome = classify_stuck(cur)
    trace.final = cur
    return trace
