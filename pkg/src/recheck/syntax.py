"""Core language: terms, concrete grammar, printing and renaming.

Surface syntax is OCaml-flavoured::

    let rec ones = Cons(One, ones) in ones

Tuples, non-recursive ``let`` and ``if`` are desugared while parsing, so
parser output only ever contains the six core forms below.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

Span = Tuple[int, int]


@dataclass(frozen=True)
class VarId:
    """A variable. Identity is the ``uid``; ``name`` and ``span`` are cosmetic."""

    name: str = field(compare=False)
    uid: int
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return self.name

    def at(self, span: Optional[Span]) -> "VarId":
        return VarId(self.name, self.uid, span)


def _cached_hash(cls):
    """Memoise the generated structural hash; terms are hashed a lot as cache keys."""
    structural = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = structural(self)
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


@_cached_hash
@dataclass(frozen=True)
class Var:
    var: VarId


@_cached_hash
@dataclass(frozen=True)
class LetRec:
    bindings: Tuple[Tuple[VarId, "Term"], ...]
    body: "Term"


@_cached_hash
@dataclass(frozen=True)
class Lam:
    param: VarId
    body: "Term"


@_cached_hash
@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@_cached_hash
@dataclass(frozen=True)
class Constr:
    tag: str
    args: Tuple["Term", ...] = ()


@_cached_hash
@dataclass(frozen=True)
class Clause:
    tag: str
    params: Tuple[VarId, ...]
    body: "Term"


@_cached_hash
@dataclass(frozen=True)
class Match:
    scrutinee: "Term"
    clauses: Tuple[Clause, ...]


Term = Union[Var, LetRec, Lam, App, Constr, Match]


class ParseError(Exception):
    """Raised with a list of ``(message, span)`` diagnostics."""

    def __init__(self, diagnostics: List[Tuple[str, Span]]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(msg for msg, _ in diagnostics))

    @property
    def span(self) -> Span:
        return self.diagnostics[0][1]


def tuple_tag(n: int) -> str:
    return f"Tuple{n}"


_TUPLE_RE = re.compile(r"Tuple(\d+)$")


def tuple_arity(tag: str) -> Optional[int]:
    m = _TUPLE_RE.match(tag)
    if m and int(m.group(1)) >= 2:
        return int(m.group(1))
    return None


# ---------------------------------------------------------------------------
# Generic traversals


def children(t: Term) -> List[Term]:
    if isinstance(t, Var):
        return []
    if isinstance(t, Lam):
        return [t.body]
    if isinstance(t, App):
        return [t.fn, t.arg]
    if isinstance(t, Constr):
        return list(t.args)
    if isinstance(t, Match):
        return [t.scrutinee] + [c.body for c in t.clauses]
    if isinstance(t, LetRec):
        return [rhs for _, rhs in t.bindings] + [t.body]
    raise TypeError(f"not a term: {t!r}")


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal."""
    stack = [t]
    while stack:
        s = stack.pop()
        yield s
        stack.extend(reversed(children(s)))


def size(t: Term) -> int:
    """Node count; clauses and binders are not nodes of their own."""
    return sum(1 for _ in subterms(t))


def binders(t: Term) -> Iterator[VarId]:
    for s in subterms(t):
        if isinstance(s, Lam):
            yield s.param
        elif isinstance(s, Match):
            for c in s.clauses:
                yield from c.params
        elif isinstance(s, LetRec):
            for x, _ in s.bindings:
                yield x


def free_vars(t: Term) -> Set[VarId]:
    if isinstance(t, Var):
        return {t.var}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.param}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    if isinstance(t, Constr):
        return set().union(*map(free_vars, t.args))
    if isinstance(t, Match):
        out = free_vars(t.scrutinee)
        for c in t.clauses:
            out |= free_vars(c.body) - set(c.params)
        return out
    if isinstance(t, LetRec):
        out = free_vars(t.body)
        for _, rhs in t.bindings:
            out |= free_vars(rhs)
        return out - {x for x, _ in t.bindings}
    raise TypeError(f"not a term: {t!r}")


def max_uid(t: Term) -> int:
    uids = [s.var.uid for s in subterms(t) if isinstance(s, Var)]
    uids += [x.uid for x in binders(t)]
    return max(uids, default=-1)


def letrecs(t: Term) -> Iterator[LetRec]:
    """Every ``LetRec`` node, in source (pre-)order."""
    for s in subterms(t):
        if isinstance(s, LetRec):
            yield s


# ---------------------------------------------------------------------------
# Renaming and substitution


def _rename(t: Term, env: Dict[int, VarId], fresh: Iterator[int]) -> Term:
    """Give every binder of ``t`` a new uid from ``fresh``; ``env`` maps old uid to new binder."""

    def bind(x: VarId) -> VarId:
        y = VarId(x.name, next(fresh), x.span)
        env[x.uid] = y
        return y

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            y = env.get(t.var.uid)
            return t if y is None else Var(y.at(t.var.span))
        if isinstance(t, Lam):
            saved = dict(env)
            p = bind(t.param)
            out = Lam(p, go(t.body))
            env.clear(), env.update(saved)
            return out
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg))
        if isinstance(t, Constr):
            return Constr(t.tag, tuple(go(a) for a in t.args))
        if isinstance(t, Match):
            scrut = go(t.scrutinee)
            clauses = []
            for c in t.clauses:
                saved = dict(env)
                ps = tuple(bind(p) for p in c.params)
                clauses.append(Clause(c.tag, ps, go(c.body)))
                env.clear(), env.update(saved)
            return Match(scrut, tuple(clauses))
        if isinstance(t, LetRec):
            saved = dict(env)
            names = [bind(x) for x, _ in t.bindings]
            rhss = [go(rhs) for _, rhs in t.bindings]
            out = LetRec(tuple(zip(names, rhss)), go(t.body))
            env.clear(), env.update(saved)
            return out
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def rename_unique(t: Term, start: Optional[int] = None) -> Term:
    """Alpha-rename so that every binder has its own uid.

    Binders are numbered in traversal order from ``start`` (by default one
    past the largest free uid), which makes the result canonical: renaming
    twice gives the same term, and alpha-equivalent terms with the same free
    variables rename to equal terms.
    """
    if start is None:
        start = max((x.uid for x in free_vars(t)), default=-1) + 1
    return _rename(t, {}, itertools.count(start))


def freshen(t: Term, fresh: Iterator[int]) -> Term:
    """Copy ``t`` with new uids (drawn from ``fresh``) for all of its binders."""
    return _rename(t, {}, fresh)


def has_binders(t: Term) -> bool:
    return any(isinstance(s, (Lam, Match, LetRec)) for s in subterms(t))


def substitute(t: Term, sub: Mapping[int, Term], fresh: Iterator[int]) -> Term:
    """Replace free occurrences of variables (keyed by uid) with terms.

    Each inserted copy that contains binders is freshened so binder uids
    stay unique. Binders of ``t`` are assumed distinct from the uids in
    ``sub`` and from the free variables of the replacements.
    """
    if not sub:
        return t

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            r = sub.get(t.var.uid)
            if r is None:
                return t
            return freshen(r, fresh) if has_binders(r) else r
        if isinstance(t, Lam):
            return Lam(t.param, go(t.body))
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg))
        if isinstance(t, Constr):
            return Constr(t.tag, tuple(go(a) for a in t.args))
        if isinstance(t, Match):
            return Match(go(t.scrutinee), tuple(Clause(c.tag, c.params, go(c.body)) for c in t.clauses))
        if isinstance(t, LetRec):
            return LetRec(tuple((x, go(rhs)) for x, rhs in t.bindings), go(t.body))
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def alpha_equal(t1: Term, t2: Term) -> bool:
    """Equality up to the choice of binder uids (free variables must agree)."""
    if free_vars(t1) != free_vars(t2):
        return False
    start = max(max_uid(t1), max_uid(t2)) + 1
    return rename_unique(t1, start) == rename_unique(t2, start)


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {"fun", "let", "rec", "and", "in", "match", "with", "if", "then", "else"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<punct>[=|(),])
  | (?P<lident>[a-z_][A-Za-z0-9_']*)
  | (?P<uident>[A-Z][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # "kw", "lident", "uident", "punct", "eof"
    text: str
    span: Span


def tokenize(source: str) -> List[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source.startswith("(*", pos):
            depth, start = 0, pos
            while pos < n:
                if source.startswith("(*", pos):
                    depth += 1
                    pos += 2
                elif source.startswith("*)", pos):
                    depth -= 1
                    pos += 2
                    if depth == 0:
                        break
                else:
                    pos += 1
            if depth:
                raise ParseError([("unterminated comment", (start, n))])
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError([(f"unexpected character {source[pos]!r}", (pos, pos + 1))])
        kind = m.lastgroup
        text = m.group()
        span = (pos, m.end())
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "arrow":
            kind = "punct"
        if kind == "lident" and text in KEYWORDS:
            kind = "kw"
        tokens.append(Token(kind, text, span))
    tokens.append(Token("eof", "", (n, n)))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    """Recursive descent over the token list; variables come out unresolved (uid -1)."""

    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, span: Optional[Span] = None):
        raise ParseError([(msg, span or self.tok.span)])

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "punct") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}' but found '{self.tok.text or 'end of input'}'")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> VarId:
        if self.tok.kind != "lident":
            self.error(f"expected an identifier but found '{self.tok.text or 'end of input'}'")
        tok = self.tok
        self.i += 1
        return VarId(tok.text, -1, tok.span)

    def uident(self) -> str:
        tok = self.tok
        if tok.kind != "uident":
            self.error(f"expected a constructor but found '{tok.text or 'end of input'}'")
        if tok.text.startswith("Tuple"):
            self.error(f"constructor name '{tok.text}' is reserved for tuples", tok.span)
        self.i += 1
        return tok.text

    def program(self) -> Term:
        t = self.term()
        if self.tok.kind != "eof":
            self.error(f"unexpected '{self.tok.text}'")
        return t

    def term(self) -> Term:
        if self.accept("fun"):
            x = self.ident()
            self.expect("->")
            return Lam(x, self.term())
        if self.accept("let"):
            if self.accept("rec"):
                binds = [self.binding()]
                while self.accept("and"):
                    binds.append(self.binding())
                self.expect("in")
                return LetRec(tuple(binds), self.term())
            x, rhs = self.binding()
            self.expect("in")
            return _NonRec(x, rhs, self.term())
        if self.accept("match"):
            scrut = self.term()
            self.expect("with")
            self.accept("|")
            clauses = [self.clause()]
            while self.accept("|"):
                clauses.append(self.clause())
            return Match(scrut, tuple(clauses))
        if self.accept("if"):
            cond = self.term()
            self.expect("then")
            a = self.term()
            self.expect("else")
            b = self.term()
            return Match(cond, (Clause("True", (), a), Clause("False", (), b)))
        return self.app()

    def binding(self) -> Tuple[VarId, Term]:
        x = self.ident()
        self.expect("=")
        return x, self.term()

    def clause(self) -> Clause:
        tag = self.uident()
        params: List[VarId] = []
        if self.accept("("):
            if not self.at(")"):
                params.append(self.ident())
                while self.accept(","):
                    params.append(self.ident())
            self.expect(")")
        self.expect("->")
        return Clause(tag, tuple(params), self.term())

    def starts_atom(self) -> bool:
        return self.tok.kind in ("lident", "uident") or self.at("(")

    def app(self) -> Term:
        t = self.atom()
        while self.starts_atom():
            t = App(t, self.atom())
        return t

    def atom(self) -> Term:
        tok = self.tok
        if tok.kind == "lident":
            return Var(self.ident())
        if tok.kind == "uident":
            tag = self.uident()
            args: List[Term] = []
            if self.accept("("):
                if not self.at(")"):
                    args.append(self.term())
                    while self.accept(","):
                        args.append(self.term())
                self.expect(")")
            return Constr(tag, tuple(args))
        if self.accept("("):
            items = [self.term()]
            while self.accept(","):
                items.append(self.term())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return Constr(tuple_tag(len(items)), tuple(items))
        self.error(f"unexpected '{tok.text or 'end of input'}'")


@dataclass(frozen=True)
class _NonRec:
    # `let x = t in u` before scope resolution: x is not in scope of t.
    var: VarId
    rhs: Term
    body: Term


def _resolve(t: Term, free: Dict[str, VarId], allow_free: bool, counter: Iterator[int]) -> Term:
    scope: Dict[str, VarId] = {}

    def bind_all(xs: Sequence[VarId], what: str) -> Tuple[List[VarId], Dict[str, VarId]]:
        seen: Set[str] = set()
        for x in xs:
            if x.name in seen:
                raise ParseError([(f"variable '{x.name}' is bound several times in this {what}", x.span)])
            seen.add(x.name)
        new = [VarId(x.name, next(counter), x.span) for x in xs]
        saved = dict(scope)
        scope.update((x.name, x) for x in new)
        return new, saved

    def restore(saved: Dict[str, VarId]) -> None:
        scope.clear()
        scope.update(saved)

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            x = t.var
            v = scope.get(x.name) or free.get(x.name)
            if v is None:
                if not allow_free:
                    raise ParseError([(f"unbound variable '{x.name}'", x.span)])
                v = free[x.name] = VarId(x.name, next(counter))
            return Var(v.at(x.span))
        if isinstance(t, Lam):
            (p,), saved = bind_all([t.param], "function")
            out = Lam(p, go(t.body))
            restore(saved)
            return out
        if isinstance(t, App):
            return App(go(t.fn), go(t.arg))
        if isinstance(t, Constr):
            return Constr(t.tag, tuple(go(a) for a in t.args))
        if isinstance(t, Match):
            scrut = go(t.scrutinee)
            clauses = []
            for c in t.clauses:
                ps, saved = bind_all(c.params, "pattern")
                clauses.append(Clause(c.tag, tuple(ps), go(c.body)))
                restore(saved)
            return Match(scrut, tuple(clauses))
        if isinstance(t, _NonRec):
            rhs = go(t.rhs)
            (x,), saved = bind_all([t.var], "let")
            out = LetRec(((x, rhs),), go(t.body))
            restore(saved)
            return out
        if isinstance(t, LetRec):
            names, saved = bind_all([x for x, _ in t.bindings], "let rec")
            rhss = [go(rhs) for _, rhs in t.bindings]
            out = LetRec(tuple(zip(names, rhss)), go(t.body))
            restore(saved)
            return out
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def parse(
    source: str,
    *,
    free: Optional[Mapping[str, VarId]] = None,
    allow_free: bool = False,
    start: int = 0,
) -> Term:
    """Parse and desugar ``source`` into a well-scoped, uniquely-named core term.

    Free variables are an error unless they appear in ``free`` or
    ``allow_free`` is set, in which case each distinct free name gets one
    uid. Binder uids are allocated from ``start`` upwards, past any uid in
    ``free``. Raises :class:`ParseError`.
    """
    free = dict(free or {})
    first = max([start - 1] + [v.uid for v in free.values()]) + 1
    raw = _Parser(source).program()
    return _resolve(raw, free, allow_free, itertools.count(first))


# ---------------------------------------------------------------------------
# Printer

# printing contexts
# _ARG_MID is an argument followed by further arguments
_TOP, _FN, _ARG, _ARG_MID, _CLAUSE = range(5)


def _is_open_form(t: Term) -> bool:
    """Forms that extend as far right as possible and need parens inside applications."""
    return isinstance(t, (Lam, LetRec, Match))


def print_term(t: Term) -> str:
    """Render ``t`` in concrete syntax.

    Binder names that would capture or shadow a different variable of the
    same name get a numeric suffix, so the output always re-parses to an
    alpha-equivalent term.
    """
    used = {s.var.name for s in subterms(t) if isinstance(s, Var)} | {x.name for x in binders(t)}
    in_scope: Dict[str, int] = {x.name: x.uid for x in free_vars(t)}
    names: Dict[int, str] = {x.uid: x.name for x in free_vars(t)}

    def pick(x: VarId) -> str:
        name = x.name
        if name in in_scope and in_scope[name] != x.uid:
            for k in itertools.count(1):
                cand = f"{x.name}_{k}"
                if cand not in used and cand not in in_scope:
                    name = cand
                    break
            used.add(name)
        return name

    def bind(x: VarId, saved: list) -> str:
        name = pick(x)
        saved.append((name, in_scope.get(name), x.uid, names.get(x.uid)))
        in_scope[name] = x.uid
        names[x.uid] = name
        return name

    def unbind(saved: list) -> None:
        for name, prev, uid, prev_name in reversed(saved):
            if prev is None:
                in_scope.pop(name, None)
            else:
                in_scope[name] = prev
            if prev_name is None:
                names.pop(uid, None)
            else:
                names[uid] = prev_name

    def go(t: Term, ctx: int) -> str:
        if isinstance(t, Var):
            return names.get(t.var.uid, t.var.name)
        if isinstance(t, Constr):
            n = tuple_arity(t.tag)
            if n is not None and n == len(t.args):
                return "(" + ", ".join(go(a, _TOP) for a in t.args) + ")"
            if not t.args:
                # "K (x)" would read back as K applied to one argument
                return t.tag + "()" if ctx in (_FN, _ARG_MID) else t.tag
            return t.tag + "(" + ", ".join(go(a, _TOP) for a in t.args) + ")"
        if isinstance(t, App):
            s = go(t.fn, _FN) + " " + go(t.arg, _ARG_MID if ctx == _FN else _ARG)
            return f"({s})" if ctx in (_ARG, _ARG_MID) else s
        saved: list = []
        if isinstance(t, Lam):
            x = bind(t.param, saved)
            s = f"fun {x} -> {go(t.body, _TOP)}"
        elif isinstance(t, Match):
            scrut = go(t.scrutinee, _TOP)
            parts = []
            for k, c in enumerate(t.clauses):
                csaved: list = []
                ps = [bind(p, csaved) for p in c.params]
                pat = c.tag + ("(" + ", ".join(ps) + ")" if ps else "")
                last = k == len(t.clauses) - 1
                parts.append(f"{pat} -> {go(c.body, _TOP if last else _CLAUSE)}")
                unbind(csaved)
            s = f"match {scrut} with " + " | ".join(parts)
        else:
            assert isinstance(t, LetRec)
            xs = [bind(x, saved) for x, _ in t.bindings]
            binds = " and ".join(f"{x} = {go(rhs, _TOP)}" for x, (_, rhs) in zip(xs, t.bindings))
            s = f"let rec {binds} in {go(t.body, _TOP)}"
        unbind(saved)
        return f"({s})" if ctx != _TOP else s

    return go(t, _TOP)


def line_col(source: str, offset: int) -> Tuple[int, int]:
    """1-based line and column of a character offset."""
    line = source.count("\n", 0, offset) + 1
    col = offset - (source.rfind("\n", 0, offset) + 1) + 1
    return line, col
