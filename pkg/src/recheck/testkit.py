"""Brute-force oracle for the mode system, term enumeration and random generation.

The oracle decides ``Γ ⊢ t : m`` by direct search over the declarative rules
and never calls :mod:`recheck.infer`; it is only practical for small terms.
"""
from __future__ import annotations

import functools
import itertools
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

from recheck.modes import Mode, compose, env_compose, env_join, env_le
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
    children,
    free_vars,
    size,
    subterms,
)

ModeEnv = Dict[VarId, Mode]
_Frozen = FrozenSet[Tuple[VarId, Mode]]

MODES = tuple(Mode)
MAX_ORACLE_GROUP = 2


def _freeze(g: Mapping[VarId, Mode]) -> _Frozen:
    return frozenset((k, v) for k, v in g.items() if v is not Mode.IGNORE)


# ---------------------------------------------------------------------------
# Oracle


def oracle_check(g: Mapping[VarId, Mode], t: Term, m: Mode, limit: Mode = Mode.GUARD) -> bool:
    """Is ``g ⊢ t : m`` derivable?

    Every premise is checked against the whole of ``g``: environments merge
    by pointwise maximum and weakening holds, so a split into per-premise
    environments exists iff each premise holds under ``g`` itself.

    ``limit`` bounds the mutual-use modes allowed inside a recursive group.
    With ``Guard`` this is the declarative system; with ``Dereference`` the
    acceptance premise is dropped, which matches the total inference that
    still assigns environments to rejected groups.
    """
    return _check(_freeze(g), t, Mode(m), Mode(limit))


@functools.lru_cache(maxsize=None)
def _check(g: _Frozen, t: Term, m: Mode, limit: Mode) -> bool:
    env = dict(g)
    if isinstance(t, Var):
        return m <= env.get(t.var, Mode.IGNORE)
    if isinstance(t, Lam):
        # the parameter's mode is not constrained by the lambda rule
        return _check(g | {(t.param, Mode.DEREFERENCE)}, t.body, compose(m, Mode.DELAY), limit)
    if isinstance(t, App):
        md = compose(m, Mode.DEREFERENCE)
        return _check(g, t.fn, md, limit) and _check(g, t.arg, md, limit)
    if isinstance(t, Constr):
        mg = compose(m, Mode.GUARD)
        return all(_check(g, a, mg, limit) for a in t.args)
    if isinstance(t, Match):
        if not _check(g, t.scrutinee, compose(m, Mode.DEREFERENCE), limit):
            return False
        return all(
            _check(g | {(p, Mode.DEREFERENCE) for p in c.params}, c.body, m, limit) for c in t.clauses
        )
    if isinstance(t, LetRec):
        return _check_letrec(g, t, m, limit)
    raise TypeError(f"not a term: {t!r}")


def _check_letrec(g: _Frozen, t: LetRec, m: Mode, limit: Mode) -> bool:
    names = [x for x, _ in t.bindings]
    k = len(names)
    if k > MAX_ORACLE_GROUP:
        raise ValueError(f"oracle supports at most {MAX_ORACLE_GROUP} mutual bindings, got {k}")
    group = set(names)

    # Definitions are checked at Return; the least joint environment over
    # their free variables gives both the mutual-use matrix and the ambient
    # part. Larger matrix entries only enlarge the closure below, so the
    # least one is the best candidate.
    own: Dict[VarId, ModeEnv] = {}
    matrix: Dict[Tuple[VarId, VarId], Mode] = {}
    for x, rhs in t.bindings:
        joint = _min_env(rhs, Mode.RETURN, limit)
        for y in names:
            matrix[(x, y)] = joint.pop(y, Mode.IGNORE)
        own[x] = joint
    if any(mode > limit for mode in matrix.values()):
        return False

    # The body may use each x_i at any mode m_i whose closure fits in g.
    # That premise is downward closed in m_i and the body premise is upward
    # closed (weakening), so only the largest admissible m_i need be tried.
    env = dict(g)
    floor = compose(m, Mode.GUARD)
    body_modes = []
    for x in names:
        closure = _closure(x, names, matrix, own)
        fits = [mi for mi in MODES if env_le(env_compose(max(mi, floor), closure), env)]
        if not fits:
            return False
        body_modes.append(fits[-1])
    gb = {kv for kv in g if kv[0] not in group} | set(zip(names, body_modes))
    return _check(frozenset(gb), t.body, m, limit)


def _closure(start: VarId, names, matrix, own) -> ModeEnv:
    """Join over every chain start -> ... -> y of (chain mode ∘ own[y]).

    Chain modes are accumulated by reachability over (binding, mode) pairs,
    a finite state space since modes are closed under composition.
    """
    seen = {(start, Mode.RETURN)}
    todo = [(start, Mode.RETURN)]
    while todo:
        x, acc = todo.pop()
        for y in names:
            edge = matrix[(x, y)]
            if edge is Mode.IGNORE:
                continue
            state = (y, compose(acc, edge))
            if state not in seen:
                seen.add(state)
                todo.append(state)
    return env_join(*(env_compose(acc, own[y]) for y, acc in seen))


def oracle_min_env(t: Term, m: Mode, limit: Mode = Mode.GUARD) -> ModeEnv:
    """Least environment (by enumeration of all mode assignments) under which ``t : m`` checks.

    Raises ``LookupError`` when no assignment works, which happens exactly
    when some recursive group exceeds ``limit``.
    """
    return dict(_min_env(t, Mode(m), Mode(limit)))


@functools.lru_cache(maxsize=None)
def _min_env_cached(t: Term, m: Mode, limit: Mode) -> _Frozen:
    fv = sorted(free_vars(t), key=lambda v: v.uid)
    sat = []
    for modes in itertools.product(MODES, repeat=len(fv)):
        g = _freeze(dict(zip(fv, modes)))
        if _check(g, t, m, limit):
            sat.append(dict(g))
    if not sat:
        raise LookupError("no environment satisfies the judgment")
    least = {x: min(e.get(x, Mode.IGNORE) for e in sat) for x in fv}
    least_f = _freeze(least)
    # principality: the pointwise minimum of satisfying environments satisfies
    assert _check(least_f, t, m, limit), "meet of satisfying environments does not satisfy"
    return least_f


def _min_env(t: Term, m: Mode, limit: Mode) -> ModeEnv:
    # cache hits may come from a term whose variables share uids but not names
    own = {v: v for v in free_vars(t)}
    return {own.get(x, x): mode for x, mode in _min_env_cached(t, m, limit)}


def oracle_satisfying(t: Term, m: Mode, limit: Mode = Mode.GUARD) -> List[ModeEnv]:
    """All environments over ``free_vars(t)`` under which ``t : m`` checks."""
    fv = sorted(free_vars(t), key=lambda v: v.uid)
    out = []
    for modes in itertools.product(MODES, repeat=len(fv)):
        g = dict(_freeze(dict(zip(fv, modes))))
        if oracle_check(g, t, m, limit):
            out.append(g)
    return out


def clear_caches() -> None:
    _check.cache_clear()
    _min_env_cached.cache_clear()


# ---------------------------------------------------------------------------
# Exhaustive enumeration

DEFAULT_POOL: Tuple[Tuple[str, int], ...] = (("K", 0), ("J", 1))


def ambient(n: int, start: int = 0) -> List[VarId]:
    return [VarId("abcdefgh"[i], start + i) for i in range(n)]


def enumerate_terms(
    size: int,
    scope: Sequence[VarId],
    pool: Sequence[Tuple[str, int]] = DEFAULT_POOL,
    max_group: int = 2,
) -> Iterator[Term]:
    """All well-scoped terms of exactly ``size`` nodes over ``pool``.

    Binder uids are allocated above every uid in ``scope``; alpha-variants
    are not produced twice because binder names are chosen deterministically.
    """
    first = max((v.uid for v in scope), default=-1) + 1
    return _enum(size, tuple(scope), tuple(pool), max_group, first)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered splits of ``total`` into ``parts`` positive integers."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _enum(n: int, scope, pool, max_group: int, uid: int) -> Iterator[Term]:
    if n <= 0:
        return
    if n == 1:
        for v in scope:
            yield Var(v)
    for tag, arity in pool:
        if arity == 0 and n == 1:
            yield Constr(tag)
        elif arity > 0:
            for sizes in _compositions(n - 1, arity):
                for args in itertools.product(*(list(_enum(s, scope, pool, max_group, uid)) for s in sizes)):
                    yield Constr(tag, tuple(args))
    if n >= 2:
        x = VarId(f"x{uid}", uid)
        for body in _enum(n - 1, scope + (x,), pool, max_group, uid + 1):
            yield Lam(x, body)
    if n >= 3:
        for k in range(1, n - 1):
            for f in _enum(k, scope, pool, max_group, uid):
                for a in _enum(n - 1 - k, scope, pool, max_group, uid):
                    yield App(f, a)
    # match with one or two clauses with distinct head constructors
    for ncl in (1, 2):
        for tags in itertools.permutations(pool, ncl):
            if n < 2 + ncl:
                continue
            for sizes in _compositions(n - 1, 1 + ncl):
                for scrut in _enum(sizes[0], scope, pool, max_group, uid):
                    bodies = []
                    next_uid = uid
                    pats = []
                    for (tag, arity), _ in zip(tags, sizes[1:]):
                        ps = tuple(VarId(f"p{next_uid + i}", next_uid + i) for i in range(arity))
                        next_uid += arity
                        pats.append((tag, ps))
                    bodies = [
                        list(_enum(s, scope + ps, pool, max_group, next_uid))
                        for (_, ps), s in zip(pats, sizes[1:])
                    ]
                    for combo in itertools.product(*bodies):
                        yield Match(
                            scrut, tuple(Clause(tag, ps, b) for (tag, ps), b in zip(pats, combo))
                        )
    for k in range(1, max_group + 1):
        if n < 2 + k:
            continue
        names = tuple(VarId(f"r{uid + i}", uid + i) for i in range(k))
        inner = scope + names
        for sizes in _compositions(n - 1, k + 1):
            parts = [list(_enum(s, inner, pool, max_group, uid + k)) for s in sizes]
            for combo in itertools.product(*parts):
                yield LetRec(tuple(zip(names, combo[:k])), combo[k])


# ---------------------------------------------------------------------------
# Random generation


@dataclass
class GenConfig:
    max_size: int = 12
    max_vars: int = 2
    constructor_pool: Tuple[Tuple[str, int], ...] = (("Nil", 0), ("Zero", 0), ("Succ", 1), ("Cons", 2))
    letrec_width: int = 2
    seed: int = 0
    # probability that a variable occurrence prefers a name from the innermost let rec group
    recursive_bias: float = 0.5
    # probability that the function position of an application is a lambda
    lambda_bias: float = 0.3
    # make the root a let rec whose body is an application or a match
    program: bool = False

    def __post_init__(self):
        if self.max_size < 1 or self.letrec_width < 1 or self.max_vars < 0 or not self.constructor_pool:
            raise ValueError(f"invalid generator configuration: {self}")


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.next_uid = cfg.max_vars
        self.nullary = [c for c in cfg.constructor_pool if c[1] == 0] or [("Unit", 0)]

    def fresh(self, prefix: str) -> VarId:
        uid = self.next_uid
        self.next_uid += 1
        return VarId(f"{prefix}{uid}", uid)

    def leaf(self, scope: List[VarId], group: List[VarId]) -> Term:
        rng = self.rng
        if group and rng.random() < self.cfg.recursive_bias:
            return Var(rng.choice(group))
        if scope and rng.random() < 0.6:
            return Var(rng.choice(scope))
        return Constr(rng.choice(self.nullary)[0])

    def term(self, budget: int, scope: List[VarId], group: List[VarId], kind: Optional[str] = None) -> Term:
        rng = self.rng
        if budget <= 1:
            return self.leaf(scope, group)
        if kind is None:
            kinds = ["var", "lam", "app", "constr", "match", "letrec"]
            weights = [1, 3, 2, 4, 3, 3]
            kind = rng.choices(kinds, weights)[0]
        if kind == "var":
            return self.leaf(scope, group)
        if kind == "lam":
            x = self.fresh("v")
            return Lam(x, self.term(budget - 1, scope + [x], group))
        if kind == "app":
            left = rng.randint(1, budget - 2) if budget > 2 else 1
            right = max(1, budget - 1 - left)
            if left >= 2 and rng.random() < self.cfg.lambda_bias:
                fn: Term = self.term(left, scope, group, kind="lam")
            else:
                fn = self.term(left, scope, group)
            return App(fn, self.term(right, scope, group))
        if kind == "constr":
            tag, arity = rng.choice(self.cfg.constructor_pool)
            if arity == 0:
                return Constr(tag)
            return Constr(tag, tuple(self.term(s, scope, group) for s in self.split(budget - 1, arity)))
        if kind == "match":
            ncl = rng.randint(1, min(3, len(self.cfg.constructor_pool)))
            cons = rng.sample(list(self.cfg.constructor_pool), ncl)
            sizes = self.split(budget - 1, ncl + 1)
            scrut = self.term(sizes[0], scope, group)
            clauses = []
            for (tag, arity), s in zip(cons, sizes[1:]):
                ps = [self.fresh("p") for _ in range(arity)]
                clauses.append(Clause(tag, tuple(ps), self.term(s, scope + ps, group)))
            return Match(scrut, tuple(clauses))
        top = kind == "program"
        budget = max(budget, 4) if top else budget
        k = rng.randint(1, self.cfg.letrec_width)
        names = [self.fresh("r") for _ in range(k)]
        sizes = self.split(budget - 1, k + 1)
        inner = scope + names
        rhss = [self.term(s, inner, names) for s in sizes[:k]]
        body_group = names if rng.random() < 0.5 else group
        body_kind = rng.choice(["app", "match"]) if top else None
        body = self.term(sizes[k], inner, body_group, kind=body_kind)
        return LetRec(tuple(zip(names, rhss)), body)

    def split(self, total: int, parts: int) -> List[int]:
        total = max(total, parts)
        cuts = sorted(self.rng.sample(range(1, total), parts - 1)) if parts > 1 else []
        bounds = [0] + cuts + [total]
        return [b - a for a, b in zip(bounds, bounds[1:])]


def gen_term(cfg: GenConfig, rng: Optional[random.Random] = None) -> Term:
    """A random well-scoped term over ``ambient(cfg.max_vars)`` free variables."""
    rng = rng if rng is not None else random.Random(cfg.seed)
    g = _Gen(cfg, rng)
    if cfg.program:
        return g.term(rng.randint(4, max(4, cfg.max_size)), ambient(cfg.max_vars), [], kind="program")
    return g.term(rng.randint(1, cfg.max_size), ambient(cfg.max_vars), [])


def gen_terms(cfg: GenConfig, count: int) -> Iterator[Term]:
    rng = random.Random(cfg.seed)
    for _ in range(count):
        yield gen_term(cfg, rng)


# ---------------------------------------------------------------------------
# Shrinking


def _replace_at(t: Term, index: int, new: Term) -> Term:
    """Replace the ``index``-th subterm (pre-order) of ``t``."""
    counter = itertools.count()

    def go(s: Term) -> Term:
        if next(counter) == index:
            return new
        if isinstance(s, Var):
            return s
        if isinstance(s, Lam):
            return Lam(s.param, go(s.body))
        if isinstance(s, App):
            return App(go(s.fn), go(s.arg))
        if isinstance(s, Constr):
            return Constr(s.tag, tuple(go(a) for a in s.args))
        if isinstance(s, Match):
            scrut = go(s.scrutinee)
            return Match(scrut, tuple(Clause(c.tag, c.params, go(c.body)) for c in s.clauses))
        rhss = [(x, go(rhs)) for x, rhs in s.bindings]
        return LetRec(tuple(rhss), go(s.body))

    return go(t)


def shrink(t: Term, fails: Callable[[Term], bool], filler: Term = Constr("Nil")) -> Term:
    """Greedily shrink a failing term while ``fails`` keeps holding.

    Candidates replace one subterm by ``filler`` or by one of its own
    children (when that keeps the term well-scoped); the first candidate that
    still fails is taken and the search restarts from it.
    """
    assert fails(t), "shrink needs a failing input"
    fv = free_vars(t)
    improved = True
    while improved:
        improved = False
        subs = list(subterms(t))
        for i, s in enumerate(subs):
            candidates = [c for c in children(s)] + ([filler] if s != filler else [])
            for c in candidates:
                cand = _replace_at(t, i, c)
                if cand == t or not free_vars(cand) <= fv:
                    continue
                if size(cand) >= size(t) and c is not filler:
                    continue
                if fails(cand):
                    t = cand
                    improved = True
                    break
            if improved:
                break
    return t


# ---------------------------------------------------------------------------
# Corpus files

_EXPECT_RE = re.compile(r"\(\*\s*expect:\s*(.*?)\s*\*\)")


@dataclass
class CorpusEntry:
    path: Path
    kind: str  # accepted | rejected | vicious | mismatch
    expect: List[str]
    source: str


def load_corpus(root: Path) -> List[CorpusEntry]:
    """Read ``root/<kind>/*.ml``; each file's first comment declares the expectation."""
    out = []
    for kind in ("accepted", "rejected", "vicious", "mismatch"):
        for path in sorted((Path(root) / kind).glob("*.ml")):
            source = path.read_text()
            m = _EXPECT_RE.search(source.splitlines()[0] if source else "")
            if m is None:
                raise ValueError(f"{path}: first line must be an '(* expect: ... *)' comment")
            out.append(CorpusEntry(path, kind, m.group(1).split(), source))
    return out
