import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertt import oracle
from covertt.conversion import (
    Fuel,
    FuelExhausted,
    Matched,
    NoBranch,
    Stuck,
    conv,
    match_branch,
    normalize,
    whnf,
)
from covertt.coverage import check_cover, leaves
from covertt.crosscheck import matches_of, open_match
from covertt.parser import load
from covertt.pretty import show
from covertt.syntax import EMPTY, App, DataCon, Lam, Match, Pi, Telescope, TyCon, Type, Var, apply_subst
from covertt.typechecker import check, infer
from generators import GEN_SIG, TermGen, telescope, to_term, triple
from helpers import BASE_SIG, CORPUS, corpus, tel, term

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def head_match():
    sig = corpus("vec").sig
    return sig, matches_of(sig.definition("head").body)[0]


def test_beta_on_identity():
    assert whnf(BASE_SIG, App(Lam("x", Var(0)), Type())) == Type()


def test_k_combinator():
    k = Lam("x", Lam("y", Var(1)))
    a, b = DataCon("true"), DataCon("zero")
    assert normalize(BASE_SIG, App(App(k, a), b)) == a


def test_head_match_reduces_to_the_head():
    sig, m = head_match()
    ctx = tel(sig, "(A : Type, m : Nat, h : A, t : Vec(A, m))")
    scrut = tuple(term(sig, s, ctx) for s in ("A", "m", "cons(A, suc(m), m, h, t, refl(suc(m)))"))
    r = match_branch(sig, scrut, m.branches)
    assert isinstance(r, Matched) and r.branch == 0
    assert r.solution.terms == (Var(3), Var(2), Var(1), Var(0))
    assert whnf(sig, Match(scrut, m.tel, m.motive, m.branches)) == Var(1)


def test_match_on_a_variable_is_stuck():
    sig, m = head_match()
    opened = open_match(m)
    assert whnf(sig, opened) == opened
    assert isinstance(match_branch(sig, opened.scrut, m.branches), Stuck)


def test_forced_positions_are_checked_by_conversion():
    sig, m = head_match()
    base = load(open_corpus_with_bool()).sig
    one_elem = term(base, "cons(Bool, suc(zero), zero, true, nil(Bool, zero, refl(zero)), refl(suc(zero)))")
    scrut = (TyCon("Bool"), DataCon("zero"), one_elem)
    r = match_branch(base, scrut, m.branches)
    assert isinstance(r, Matched)
    assert r.solution.terms == (TyCon("Bool"), DataCon("zero"), DataCon("true"), term(base, "nil(Bool, zero, refl(zero))"))
    # the same vector claimed to have length 2 fails the forced index
    scrut = (TyCon("Bool"), DataCon("suc", (DataCon("zero"),)), one_elem)
    assert isinstance(match_branch(base, scrut, m.branches), Stuck)


def open_corpus_with_bool():
    return (CORPUS / "vec.ctt").read_text() + "\ndata Bool { true; false }\n"


def test_no_branch_on_an_uncovered_constructor():
    sig = corpus("bool_missing").sig
    m = matches_of(sig.definition("not").body)[0]
    assert isinstance(match_branch(sig, (DataCon("false"),), m.branches), NoBranch)


def test_foldr1_on_two_elements():
    sig = corpus("foldr1").sig
    ctx = tel(sig, "(A : Type, f : A -> A -> A, x : A, y : A, self : Vec(A, suc(zero)) -> A)")
    t = term(
        sig,
        "foldr1 A suc(zero) f cons(A, suc(suc(zero)), suc(zero), x, "
        "cons(A, suc(zero), zero, y, nil(A, zero, refl(zero)), refl(suc(zero))), refl(suc(suc(zero)))) self",
        ctx,
    )
    infer(sig, ctx, t)
    nf = normalize(sig, t)
    assert show(nf, ctx.names, sig) == "f x (self cons(A, suc(zero), zero, y, nil(A, zero, refl(zero)), refl(suc(zero))))"

    # cross-check: both sides denote the same value in every environment with A = Bool
    model = oracle.SetModel(sig, oracle.Bound(max_depth=3))
    rest = tel(model.sig, "(f : Bool -> Bool -> Bool, x : Bool, y : Bool, self : Vec(Bool, suc(zero)) -> Bool)")
    envs = model.enum_telescope(rest)
    assert len(envs) == 16 * 2 * 2 * 4
    for env in envs:
        full = (oracle.CTyCon("Bool", ()),) + env
        assert model.eval(full, t) == model.eval(full, nf)


def test_eqmatch_instances_in_the_corpus():
    """Each corpus match applied to one of its own leaf patterns steps to the branch body."""
    for name in ["vec", "foldr1", "bool", "eqsym", "nat"]:
        sig = corpus(name).sig
        for dname, info in sig.defs:
            for m in matches_of(info.body):
                tree = check_cover(sig, m.tel, [(b.tel, b.pattern) for b in m.branches])
                for leaf_tel, pattern in leaves(tree):
                    closed = Match(tuple(pattern), m.tel, m.motive, m.branches)
                    r = match_branch(sig, pattern, m.branches)
                    assert isinstance(r, Matched), (name, dname)
                    rhs = apply_subst(m.branches[r.branch].body, r.solution)
                    assert conv(sig, leaf_tel, closed, rhs)
                    # the solution reproduces the scrutinee up to conversion
                    for p, s in zip(m.branches[r.branch].pattern, pattern):
                        assert conv(sig, leaf_tel, apply_subst(p, r.solution), s)


def test_conv_examples():
    zero = DataCon("zero")
    assert conv(BASE_SIG, EMPTY, App(Lam("x", Var(0)), zero), zero)
    assert not conv(BASE_SIG, EMPTY, zero, DataCon("suc", (zero,)))
    assert conv(BASE_SIG, EMPTY, term(BASE_SIG, "one"), DataCon("suc", (zero,)))
    assert conv(BASE_SIG, EMPTY, term(BASE_SIG, "not true"), DataCon("false"))
    # no eta for functions
    f = Telescope.of(("f", Pi("_", TyCon("Nat"), TyCon("Nat"))))
    assert not conv(BASE_SIG, f, Var(0), Lam("x", App(Var(1), Var(0))))


@settings(max_examples=250, deadline=None)
@given(seeds)
def test_normalize_is_idempotent(seed):
    rng = random.Random(seed)
    g = TermGen(rng)
    scope = g.scope(rng.randint(0, 3))
    t = g.term(rng.choice(["Nat", "Bool"]), scope, 4)
    n = normalize(GEN_SIG, t)
    assert normalize(GEN_SIG, n) == n


def test_normalize_is_idempotent_on_500_terms():
    rng = random.Random(2024)
    g = TermGen(rng)
    for _ in range(500):
        scope = g.scope(rng.randint(0, 3))
        ty = rng.choice(["Nat", "Bool", g.scope(1)[0]])
        t = g.term(ty, scope, 4)
        n = normalize(GEN_SIG, t)
        assert normalize(GEN_SIG, n) == n


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_lazy_conversion_agrees_with_normal_forms(seed):
    rng = random.Random(seed)
    g = TermGen(rng)
    scope = g.scope(rng.randint(0, 2))
    ty = rng.choice(["Nat", "Bool"])
    a, b = g.term(ty, scope, 3), g.term(ty, scope, 3)
    ctx = telescope(scope)
    assert conv(GEN_SIG, ctx, a, b) == (normalize(GEN_SIG, a) == normalize(GEN_SIG, b))
    assert conv(GEN_SIG, ctx, a, normalize(GEN_SIG, a))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_conv_is_an_equivalence(seed):
    rng = random.Random(seed)
    g = TermGen(rng)
    scope = g.scope(rng.randint(0, 2))
    ty = rng.choice(["Nat", "Bool"])
    ctx = telescope(scope)
    a, b, c = (g.term(ty, scope, 2) for _ in range(3))
    assert conv(GEN_SIG, ctx, a, a)
    assert conv(GEN_SIG, ctx, a, b) == conv(GEN_SIG, ctx, b, a)
    if conv(GEN_SIG, ctx, a, b) and conv(GEN_SIG, ctx, b, c):
        assert conv(GEN_SIG, ctx, a, c)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_subject_reduction(seed):
    rng = random.Random(seed)
    (delta, _, _, ty), t, _, _ = triple(rng)
    ctx = telescope(delta)
    check(GEN_SIG, ctx, whnf(GEN_SIG, t), to_term(ty))
    check(GEN_SIG, ctx, normalize(GEN_SIG, t), to_term(ty))


def test_covered_matches_never_lack_a_branch():
    bound = oracle.Bound(max_depth=3)
    for name in ["vec", "foldr1", "bool", "eqsym", "nat"]:
        sig = corpus(name).sig
        model = oracle.SetModel(sig, bound)
        for _, info in sig.defs:
            for m in matches_of(info.body):
                for env in model.enum_telescope(m.tel, 2):
                    codes = model.tel_codes(m.tel, env)
                    scrut = tuple(oracle.reify(model, c, v) for c, v in zip(codes, env))
                    r = match_branch(model.sig, scrut, m.branches)
                    assert isinstance(r, Matched)
                    # the first matching branch is the only one
                    others = [
                        j for j, b in enumerate(m.branches)
                        if j != r.branch and isinstance(match_branch(model.sig, scrut, [b]), Matched)
                    ]
                    assert others == []


def test_recursion_runs_out_of_fuel():
    sig = load("data Nat { zero; suc(n : Nat) }\ndef loop : Nat -> Nat := \\n. loop n").sig
    t = App(term(sig, "loop"), DataCon("zero"))
    with pytest.raises(FuelExhausted):
        normalize(sig, t, Fuel(500))
    # evaluation of terminating recursion stays within the default budget
    nat = corpus("nat").sig
    assert normalize(nat, term(nat, "four")) == term(nat, "suc(suc(suc(suc(zero))))")


def test_open_recursive_calls_stay_folded():
    sig = corpus("nat").sig
    ctx = tel(sig, "(k : Nat)")
    nf = normalize(sig, term(sig, "plus suc(suc(zero)) k", ctx))
    assert show(nf, ctx.names, sig) == "suc(suc(k))"
    # with the recursive argument unknown, the call cannot make progress
    stuck = term(sig, "plus k zero", ctx)
    assert normalize(sig, stuck) == stuck
