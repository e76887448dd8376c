"""First-order unification of constructor terms inside a telescope.

The most general unifier is returned as a pruned telescope together with a
substitution from it back into the original telescope. Constructor clashes
(including cyclic equations such as ``x = suc(x)``) mean the equation has no
solutions; anything that is neither a variable nor rigid is reported as
stuck rather than guessed at.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

from covertt.conversion import Fuel, conv, whnf
from covertt.syntax import (
    DataCon,
    Eq,
    Pi,
    Refl,
    Signature,
    Subst,
    Telescope,
    Term,
    TyCon,
    Type,
    Var,
    apply_subst,
    compose_subst,
    free_vars,
    id_subst,
    instantiate,
    pos_of,
    solve_var,
)


@dataclass(frozen=True)
class Success:
    tel: Telescope
    mgu: Subst  # from ``tel`` into the original telescope


@dataclass(frozen=True)
class Clash:
    position: Tuple[int, ...]
    lhs_head: str
    rhs_head: str
    equation: int = 0


@dataclass(frozen=True)
class Stuck:
    reason: str
    equation: int = 0


UnifyOutcome = Union[Success, Clash, Stuck]

Equation = Tuple[Term, Term, Term]


def _head(t: Term) -> str:
    match t:
        case DataCon(name) | TyCon(name):
            return name
        case Type():
            return "Type"
        case Pi():
            return "Pi"
        case Eq():
            return "Eq"
        case Var(i, name):
            return name or f"#{i}"
    return type(t).__name__


def _rigid_occurs(sig, x: int, t: Term, fuel) -> Optional[bool]:
    """Does variable ``x`` occur in ``t``? True if only under constructors (a cycle), None if elsewhere."""
    if x not in free_vars(t):
        return False
    t = whnf(sig, t, fuel)
    match t:
        case Var(i):
            return True if i == x else False
        case DataCon(_, args) | TyCon(_, args):
            results = [_rigid_occurs(sig, x, a, fuel) for a in args]
            if any(r is True for r in results):
                return True
            if any(r is None for r in results):
                return None
            return False
    return None if x in free_vars(t) else False


_RIGID = (DataCon, TyCon, Type, Pi, Eq)


def _arg_types(sig: Signature, tel: Telescope, args: Sequence[Term]) -> list[Term]:
    return [instantiate(b.type, args[:k], strict=True) for k, b in enumerate(tel)]


def solve_telescope_eqs(sig: Signature, ctx: Telescope, eqs: Sequence[Equation], fuel: Optional[Fuel] = None) -> UnifyOutcome:
    """Unify each ``(T, t1, t2)`` in turn, threading the unifier found so far."""
    fuel = fuel or Fuel()
    tel = ctx
    mgu = id_subst(ctx)
    # worklist entries: (left type, right type, lhs, rhs, path, equation index)
    work: list[tuple[Term, Term, Term, Term, Tuple[int, ...], int]] = [
        (ty, ty, a, b, (), k) for k, (ty, a, b) in enumerate(eqs)
    ]
    while work:
        tl, tr, a, b, path, k = work.pop(0)
        if not conv(sig, tel, tl, tr, fuel):
            return Stuck("heterogeneous equation", k)
        if conv(sig, tel, a, b, fuel):
            continue
        a = whnf(sig, a, fuel)
        b = whnf(sig, b, fuel)
        n = len(tel)
        var_side = None
        if isinstance(a, Var) and isinstance(b, Var):
            # solve the more recently bound one
            var_side = (a, b) if a.index < b.index else (b, a)
        elif isinstance(a, Var):
            var_side = (a, b)
        elif isinstance(b, Var):
            var_side = (b, a)
        if var_side is not None:
            x, u = var_side
            occ = _rigid_occurs(sig, x.index, u, fuel)
            if occ is True:
                return Clash(path, _head(a), _head(b), k)
            if occ is None:
                return Stuck(f"{x.name or x.index} occurs under a non-constructor", k)
            solved = solve_var(tel, pos_of(n, x.index), u)
            if solved is None:
                return Stuck("no dependency-respecting order after solving", k)
            tel, rho = solved
            mgu = compose_subst(mgu, rho)
            work = [
                (apply_subst(w0, rho), apply_subst(w1, rho), apply_subst(w2, rho), apply_subst(w3, rho), p, i)
                for w0, w1, w2, w3, p, i in work
            ]
            continue
        match a, b:
            case DataCon(c1, a1), DataCon(c2, a2):
                if c1 != c2:
                    return Clash(path, c1, c2, k)
                con_tel = sig.con_telescope(c1)
                sub = _decompose(sig, con_tel, a1, a2, path, k)
            case TyCon(c1, a1), TyCon(c2, a2):
                if c1 != c2:
                    return Clash(path, c1, c2, k)
                sub = _decompose(sig, sig.params(c1), a1, a2, path, k)
            case Eq(t1, l1, r1), Eq(t2, l2, r2):
                sub = [
                    (Type(), Type(), t1, t2, path + (0,), k),
                    (t1, t2, l1, l2, path + (1,), k),
                    (t1, t2, r1, r2, path + (2,), k),
                ]
            case Refl(x1), Refl(x2):
                ty = whnf(sig, tl, fuel)
                if not isinstance(ty, Eq):
                    return Stuck("refl at a non-equality type", k)
                sub = [(ty.ty, ty.ty, x1, x2, path + (0,), k)]
            case _:
                if isinstance(a, _RIGID) and isinstance(b, _RIGID) and type(a) is not type(b):
                    return Clash(path, _head(a), _head(b), k)
                return Stuck(f"cannot unify {_head(a)} with {_head(b)}", k)
        work = sub + work
    return Success(tel, Subst(mgu.terms, ctx))


def _decompose(sig, tel: Telescope, a1, a2, path, k):
    ls = _arg_types(sig, tel, a1)
    rs = _arg_types(sig, tel, a2)
    return [(ls[i], rs[i], a1[i], a2[i], path + (i,), k) for i in range(len(tel))]


def unify(sig: Signature, ctx: Telescope, ty: Term, t1: Term, t2: Term, fuel: Optional[Fuel] = None) -> UnifyOutcome:
    return solve_telescope_eqs(sig, ctx, [(ty, t1, t2)], fuel)
