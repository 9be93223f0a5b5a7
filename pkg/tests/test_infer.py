import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recheck.infer import accepted, check_letrec, check_program, infer_bindings, infer_handler, infer_term
from recheck.modes import Mode, compose, env_compose, env_le
from recheck.syntax import free_vars, parse
from recheck.testkit import GenConfig, gen_term, oracle_check, oracle_min_env

I, D, G, R, X = Mode


def named(env):
    return {x.name: m for x, m in env.items()}


def infer_src(source, mode=R):
    return named(infer_term(parse(source, allow_free=True), mode))


@pytest.mark.parametrize(
    "source, mode, expected",
    [
        ("x", R, {"x": R}),
        ("fun z -> y", R, {"y": D}),
        ("K(x)", R, {"x": G}),
        ("let z = y in K", R, {"y": G}),
        ("match x with K -> K", R, {"x": X}),
        ("K(x)", X, {"x": X}),
        ("f x", R, {"f": X, "x": X}),
        ("fun z -> f (K(z, y))", R, {"f": D, "y": D}),
        ("let rec xs = Cons(y, xs) in xs", R, {"y": G}),
        ("let rec xs = Cons(y, xs) in K", I, {}),
        ("let z = y in z", R, {"y": R}),
        ("let z = f y in K", D, {"f": D, "y": D}),
    ],
)
def test_infer_examples(source, mode, expected):
    assert infer_src(source, mode) == expected


def test_infer_ignore_is_empty():
    assert infer_src("match f x with K(a) -> a y | J -> z", I) == {}


def test_discarded_binding_is_guarded():
    # the definition runs even though the body never mentions z
    assert infer_src("let z = y in K") == {"y": G}
    assert infer_src("let z = f y in K") == {"f": X, "y": X}


def test_infer_handler_examples():
    t = parse("match s with K(x) -> x", allow_free=True)
    assert infer_handler(t.clauses, R) == {}
    t = parse("match s with K -> y | J -> z", allow_free=True)
    assert named(infer_handler(t.clauses, G)) == {"y": G, "z": G}


def test_bindings_self_guard():
    t = parse("let rec x = K(x) in x")
    a = infer_bindings(t.bindings)
    x = a.names[0]
    assert a.mode_matrix == {(x, x): G}
    assert a.outer_envs == {x: {}}


def test_bindings_propagate_ambient():
    t = parse("let rec a = K(b) and b = K(c) in a", allow_free=True)
    a = infer_bindings(t.bindings)
    outer = {x.name: named(env) for x, env in a.outer_envs.items()}
    assert outer == {"a": {"c": G}, "b": {"c": G}}


def test_bindings_propagate_through_delay():
    t = parse("let rec f = fun u -> g u and g = fun v -> c v in f", allow_free=True)
    a = infer_bindings(t.bindings)
    outer = {x.name: named(env) for x, env in a.outer_envs.items()}
    assert outer == {"f": {"c": D}, "g": {"c": D}}


def test_bindings_closed_lambdas():
    t = parse("let rec f = fun x -> g x and g = fun y -> f y in f")
    a = infer_bindings(t.bindings)
    assert all(env == {} for env in a.outer_envs.values())
    assert set(a.mode_matrix.values()) == {D}


@pytest.mark.parametrize(
    "source, offenders",
    [
        ("let rec ones = Cons(One, ones) in ones", []),
        ("let rec x = x in x", [("x", "x", R)]),
        ("let rec x = match x with Foo -> Foo in x", [("x", "x", X)]),
        ("let rec f = fun a -> g a and g = fun b -> f b in f", []),
        ("let rec f = fun x -> match x with Z -> Z | S(n) -> f n in f", []),
        ("let rec x = Cons(Z, y) and y = x in x", [("y", "x", R)]),
        ("let rec x = f x and f = fun u -> u in x", [("x", "x", X), ("x", "f", X)]),
    ],
)
def test_check_letrec_examples(source, offenders):
    t = parse(source)
    v = check_letrec(t.bindings)
    assert [(o.definition.name, o.used.name, o.mode) for o in v.offenders] == offenders
    assert v.accepted == (not offenders)
    assert all(o.mode in (R, X) for o in v.offenders)


def test_check_program():
    assert check_program(parse("fun x -> x")) == []
    outer_ok = parse("let rec xs = Cons(K, xs) in let rec y = y in xs")
    verdicts = check_program(outer_ok)
    assert [v.accepted for v in verdicts] == [True, False]
    nested = parse("let rec xs = Cons(let rec y = y in y, xs) in xs")
    assert [v.accepted for v in check_program(nested)] == [True, False]
    cast = parse("let rec p = match p with Refl -> Refl in p")
    assert [v.accepted for v in check_program(cast)] == [False]


def test_offender_span_points_at_use():
    source = "let rec x = match x with K -> K in x"
    (v,) = check_program(parse(source))
    (o,) = v.offenders
    assert source[o.span[0]:o.span[1]] == "x"
    assert o.span[0] == source.index("match x") + len("match ")


def test_nonrecursive_let_trivially_passes():
    t = parse("let x = K in let y = x in y")
    assert all(v.accepted for v in check_program(t))


def test_limit_relaxes_check():
    t = parse("let rec x = x in x")
    assert not accepted(t)
    assert accepted(t, limit=R)
    assert not accepted(parse("let rec x = match x with K -> K in x"), limit=R)


# ---------------------------------------------------------------------------
# Properties over generated terms

terms = st.builds(
    GenConfig,
    max_size=st.integers(1, 20),
    max_vars=st.integers(0, 3),
    letrec_width=st.integers(1, 3),
    seed=st.integers(0, 2**32),
).map(gen_term)
modes = st.sampled_from(list(Mode))


@settings(max_examples=400, deadline=None)
@given(terms)
def test_inversion_properties(t):
    fv = free_vars(t)
    assert infer_term(t, I) == {}
    assert infer_term(t, D) == {x: D for x in fv}
    assert infer_term(t, X) == {x: X for x in fv}


@settings(max_examples=400, deadline=None)
@given(terms, modes, modes)
def test_localization(t, m, m2):
    assert infer_term(t, compose(m, m2)) == env_compose(m, infer_term(t, m2))


@settings(max_examples=400, deadline=None)
@given(terms, modes, modes)
def test_monotone_in_mode(t, m, m2):
    lo, hi = sorted((m, m2))
    assert env_le(infer_term(t, lo), infer_term(t, hi))


@settings(max_examples=200, deadline=None)
@given(terms)
def test_fixpoint_bound(t):
    from recheck.syntax import letrecs

    for lr in letrecs(t):
        a = infer_bindings(lr.bindings)
        ambient = set().union(*a.outer_envs.values())
        assert a.iterations <= len(ambient) * 4 * len(a.names) + 1
        # outer environments solve their own equations
        for x in a.names:
            for y in a.names:
                assert env_le(env_compose(a.mode(x, y), a.outer_envs[y]), a.outer_envs[x])


small_terms = st.builds(
    GenConfig,
    max_size=st.integers(1, 9),
    max_vars=st.integers(0, 2),
    letrec_width=st.integers(1, 2),
    seed=st.integers(0, 2**32),
).map(gen_term)


@settings(max_examples=300, deadline=None)
@given(small_terms, modes)
def test_minimal_against_oracle(t, m):
    limit = G if accepted(t) else X
    assert infer_term(t, m) == oracle_min_env(t, m, limit)


@settings(max_examples=150, deadline=None)
@given(small_terms, modes)
def test_satisfying_set_is_upward_closure(t, m):
    limit = G if accepted(t) else X
    fv = sorted(free_vars(t), key=lambda v: v.uid)
    least = infer_term(t, m)
    for assignment in itertools.product(Mode, repeat=len(fv)):
        g = dict(zip(fv, assignment))
        assert oracle_check(g, t, m, limit) == env_le(least, g)
