"""Unification problems over the base signature, with their expected outcome."""

from __future__ import annotations

from dataclasses import dataclass

from covertt import oracle
from covertt.conversion import conv
from covertt.syntax import Telescope, Term, apply_subst
from covertt.unification import Clash, Success, unify
from helpers import BASE_SIG, tel, term


@dataclass(frozen=True)
class Problem:
    ctx: str
    ty: str
    lhs: str
    rhs: str
    expect: str  # "Success", "Clash" or "Stuck"
    solved: int = 0  # variables eliminated on success

    def build(self) -> tuple[Telescope, Term, Term, Term]:
        ctx = tel(BASE_SIG, self.ctx)
        return ctx, term(BASE_SIG, self.ty, ctx), term(BASE_SIG, self.lhs, ctx), term(BASE_SIG, self.rhs, ctx)


PROBLEMS = [
    Problem("(n : Nat, m' : Nat)", "Nat", "suc(m')", "suc(n)", "Success", 1),
    Problem("(n : Nat)", "Nat", "suc(n)", "zero", "Clash"),
    Problem("(n : Nat)", "Nat", "n", "n", "Success", 0),
    Problem("(x : Nat)", "Nat", "x", "suc(x)", "Clash"),
    Problem("(a : Nat, b : Nat)", "NatPair", "pair(a, b)", "pair(b, zero)", "Success", 2),
    Problem("(b : Bool)", "Bool", "b", "true", "Success", 1),
    Problem("", "Bool", "true", "false", "Clash"),
    Problem("(n : Nat, m : Nat)", "Nat", "suc(suc(n))", "suc(m)", "Success", 1),
    Problem("(p : NatPair)", "NatPair", "p", "pair(zero, one)", "Success", 1),
    Problem("(x : Nat, y : Nat)", "NatPair", "pair(x, suc(y))", "pair(suc(y), x)", "Success", 1),
    Problem("(x : Nat, y : Nat)", "NatPair", "pair(x, y)", "pair(suc(y), x)", "Clash"),
    Problem("(A : Type, n : Nat, m : Nat, v : Vec(A, m))", "Nat", "n", "suc(m)", "Success", 1),
    Problem("(A : Type, x : A, y : A)", "A", "x", "y", "Success", 1),
    Problem("(e1 : Eq(Nat, zero, zero), e2 : Eq(Nat, zero, zero))", "Eq(Nat, zero, zero)", "e1", "e2", "Success", 1),
    Problem("(A : Type, B : Type)", "Type", "Vec(A, zero)", "Vec(B, zero)", "Success", 1),
    Problem("(A : Type)", "Type", "Vec(A, zero)", "Sum(A, A)", "Clash"),
    Problem("(n : Nat, m : Nat)", "Nat", "suc(n)", "suc(suc(m))", "Success", 1),
    Problem("(x : Nat, y : Nat, z : Nat)", "NatPair", "pair(x, y)", "pair(y, z)", "Success", 2),
    Problem("(b : Bool, n : Nat)", "Sum(Bool, Nat)", "inl(Bool, Nat, b)", "inr(Bool, Nat, n)", "Clash"),
    Problem("(A : Type, n : Nat, v : Vec(A, n), w : Vec(A, n))", "Vec(A, n)", "v", "w", "Success", 1),
]

STUCK = [
    Problem("(b : Bool)", "Bool", "not b", "true", "Stuck"),
    Problem("(f : Nat -> Nat, n : Nat)", "Nat", "f n", "suc(n)", "Stuck"),
]


def verify(problem: Problem, bound: oracle.Bound) -> list[str]:
    """Check an outcome against the set model; returns the violations found."""
    ctx, ty, a, b = problem.build()
    r = unify(BASE_SIG, ctx, ty, a, b)
    errors = []
    if type(r).__name__ != problem.expect:
        errors.append(f"expected {problem.expect}, got {r}")
    if isinstance(r, Clash):
        found = oracle.unifiers(BASE_SIG, ctx, ty, a, b, bound)
        if found:
            errors.append(f"clash, yet {len(found)} unifiers exist")
    if isinstance(r, Success):
        if len(ctx) - len(r.tel) != problem.solved:
            errors.append(f"solved {len(ctx) - len(r.tel)} variables, expected {problem.solved}")
        if not conv(BASE_SIG, r.tel, apply_subst(a, r.mgu), apply_subst(b, r.mgu)):
            errors.append("the unifier does not unify")
        model = oracle.SetModel(BASE_SIG, bound)
        images = set()
        for rho in model.enum_telescope(r.tel):
            env = tuple(model.eval(rho, t) for t in r.mgu.terms)
            images.add(env)
            code = model.eval(env, ty)
            if not model.equal(code, model.eval(env, a), model.eval(env, b)):
                errors.append("an instance of the unifier is not a unifier")
        for env in oracle.unifiers(BASE_SIG, ctx, ty, a, b, bound):
            if tuple(env) not in images:
                errors.append(f"unifier {env} does not factor through the mgu")
    return errors
