import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertt.syntax import (
    EMPTY,
    App,
    Binder,
    DataCon,
    Lam,
    Pi,
    ScopeError,
    Subst,
    Telescope,
    TyCon,
    Type,
    Var,
    apply_subst,
    compose_subst,
    drop_last,
    extend_subst,
    free_vars,
    id_subst,
    instantiate,
    is_well_scoped,
    replace_prefix,
    shift,
    solve_var,
    strengthen,
    weaken,
)
from generators import GEN_SIG, TermGen, telescope, triple
from helpers import BASE_SIG, corpus, tel, term

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_names_do_not_affect_equality():
    assert Lam("x", Var(0, "x")) == Lam("y", Var(0, "y"))
    assert Pi("a", Type(), Var(0)) == Pi("b", Type(), Var(0, "b"))
    assert Telescope.of(("x", Type())) == Telescope.of(("y", Type()))


def test_telescope_is_snoc_ordered():
    t = EMPTY.extend("A", Type()).extend("x", Var(0, "A"))
    assert t.names == ("A", "x")
    assert t[1].type == Var(0)
    assert id_subst(t).terms == (Var(1), Var(0))


def test_identity_substitution_on_a_variable():
    delta = Telescope.of(("x", Type()), ("y", Type()))
    assert apply_subst(Var(1), id_subst(delta)) == Var(1)


def test_head_branch_body_under_a_closed_environment():
    sig = corpus("vec").sig
    m = sig.definition("head").body.body.body.body
    br = m.branches[0]
    env = (
        TyCon("Bool"),
        DataCon("zero"),
        DataCon("true"),
        term(BASE_SIG, "nil(Bool, zero, refl(zero))"),
    )
    assert apply_subst(br.body, env) == DataCon("true")


def test_apply_subst_rejects_arity_mismatch():
    delta = Telescope.of(("x", Type()))
    with pytest.raises(ScopeError):
        apply_subst(Var(1), Subst((Type(),), delta))
    with pytest.raises(ScopeError):
        apply_subst(Var(0), Subst((Type(), Type()), delta))


def test_local_binders_are_untouched():
    t = Lam("y", App(Var(0), Var(1)))
    assert apply_subst(t, [DataCon("zero")]) == Lam("y", App(Var(0), DataCon("zero")))
    # substituting a term with free variables under a binder shifts it
    assert apply_subst(t, [Var(3)]) == Lam("y", App(Var(0), Var(4)))


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_substitution_lemma(seed):
    rng = random.Random(seed)
    (delta, gamma, xi, _), t, theta, sigma = triple(rng)
    assert apply_subst(t, id_subst(telescope(delta))) == t
    assert apply_subst(t, compose_subst(theta, sigma)) == apply_subst(apply_subst(t, theta), sigma)
    assert is_well_scoped(apply_subst(t, theta), len(gamma))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_composition_laws(seed):
    rng = random.Random(seed)
    (delta, gamma, xi, _), t, theta, sigma = triple(rng)
    g = TermGen(rng)
    zeta = g.scope(rng.randint(0, 3))
    rho = g.subst(xi, zeta, 2)
    assert compose_subst(theta, id_subst(telescope(gamma))) == Subst(theta)
    assert compose_subst(id_subst(telescope(delta)), theta) == Subst(theta)
    assert compose_subst(compose_subst(theta, sigma), rho) == compose_subst(theta, compose_subst(sigma, rho))


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_weaken_then_project(seed, k):
    rng = random.Random(seed)
    g = TermGen(rng)
    scope = g.scope(rng.randint(0, 3))
    t = g.term(rng.choice(["Nat", "Bool"]), scope, 3)
    extension = [DataCon("zero")] * k
    # the substitution keeping the original variables and dropping the new ones
    keep = id_subst(telescope(scope)).terms + tuple(extension)
    assert apply_subst(weaken(t, k), keep) == t
    assert strengthen(weaken(t, k), k) == t


def test_weaken_examples():
    assert weaken(Type(), 5) == Type()
    assert weaken(Var(0), 1) == Var(1)
    assert weaken(Var(0), Telescope.of(("a", Type()), ("b", Type()))) == Var(2)


def test_comprehension_laws():
    delta = Telescope.of(("A", Type()))
    theta = Subst((TyCon("Nat"),), delta)
    ext = extend_subst(theta, DataCon("zero"), Var(0), "x")
    assert drop_last(ext) == theta
    assert ext.terms[-1] == DataCon("zero")
    assert ext.tel.names == ("A", "x")


def test_head_scrutinee_by_extension():
    sig = corpus("vec").sig
    xi = tel(sig, "(A : Type, n : Nat, x : Vec(A, suc(n)))")
    outer = Telescope.of(("A", Type()), ("n", TyCon("Nat")), ("x", xi[2].type))
    s = extend_subst(extend_subst(extend_subst(Subst((), EMPTY), Var(2), Type(), "A"), Var(1), TyCon("Nat"), "n"), Var(0), xi[2].type, "x")
    assert s == id_subst(outer)
    assert s.tel == xi


def test_instantiate_lowers_outer_variables():
    # over (a, b): b := zero leaves a as the only variable
    assert instantiate(App(Var(1), Var(0)), [DataCon("zero")]) == App(Var(0), DataCon("zero"))
    with pytest.raises(ScopeError):
        instantiate(Var(1), [DataCon("zero")], strict=True)


def test_strengthen_refuses_to_drop_used_variables():
    with pytest.raises(ScopeError):
        strengthen(Var(0), 1)
    assert strengthen(Var(2), 2) == Var(0)


def test_shift_respects_cutoff():
    assert shift(Lam("x", App(Var(0), Var(1))), 2) == Lam("x", App(Var(0), Var(3)))
    assert free_vars(Lam("x", App(Var(0), Var(3)))) == {2}


def test_solve_var_reorders_dependents():
    sig = BASE_SIG
    # (n : Nat, m : Nat, v : Vec(Bool, m)); solving n := m must move n after m
    t = tel(sig, "(n : Nat, m : Nat, v : Vec(Bool, m))")
    new_tel, rho = solve_var(t, 1, Var(2))
    assert new_tel.names == ("n", "v")
    assert new_tel[1].type == TyCon("Vec", (TyCon("Bool"), Var(0)))
    assert rho.terms == (Var(1), Var(1), Var(0))

    # solving the earlier variable to a later one: the dependent entry moves up
    t = tel(sig, "(m : Nat, v : Vec(Bool, m), n : Nat)")
    new_tel, rho = solve_var(t, 0, Var(0))
    assert new_tel.names == ("n", "v")
    assert new_tel[1].type == TyCon("Vec", (TyCon("Bool"), Var(0)))
    assert rho.terms == (Var(1), Var(0), Var(1))


def test_replace_prefix_rescopes_the_suffix():
    sig = BASE_SIG
    t = tel(sig, "(n : Nat, v : Vec(Bool, n))")
    prefix = Telescope.of(("k", TyCon("Nat")))
    new_tel, rho = replace_prefix(t, 0, prefix, [DataCon("suc", (Var(0),))])
    assert new_tel[1].type == TyCon("Vec", (TyCon("Bool"), DataCon("suc", (Var(0),))))
    assert rho.terms == (DataCon("suc", (Var(1),)), Var(0))
    for k, b in enumerate(new_tel):
        assert is_well_scoped(b.type, k)


def test_outputs_are_well_scoped():
    rng = random.Random(7)
    for _ in range(50):
        (delta, gamma, xi, _), t, theta, sigma = triple(rng)
        assert is_well_scoped(t, len(delta))
        assert all(is_well_scoped(s, len(gamma)) for s in theta)
        assert is_well_scoped(apply_subst(apply_subst(t, theta), sigma), len(xi))


def test_signature_lookups():
    sig = BASE_SIG
    assert sig.constructors("Bool") == ("true", "false")
    assert sig.params("Vec").names == ("A", "n")
    ct = sig.con_telescope("cons")
    assert ct.names == ("A", "n", "m", "h", "t", "eq")
    assert isinstance(ct[0], Binder)
    assert GEN_SIG.has_def("plus") and not GEN_SIG.has_def("minus")
