"""Reduction and definitional equality.

Reduction steps are beta (``EqApp``), match reduction (``EqMatch``) and
unfolding of top-level definitions. Every entry point takes an optional
:class:`Fuel`; without one a fresh budget of :data:`DEFAULT_FUEL` steps is used.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from covertt.syntax import (
    App,
    Branch,
    DataCon,
    Def,
    Eq,
    Lam,
    Match,
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
    instantiate,
)

DEFAULT_FUEL = 100_000


class FuelExhausted(Exception):
    """Reduction ran out of steps; the term may not normalise."""


class Fuel:
    def __init__(self, steps: Optional[int] = None):
        self.left = DEFAULT_FUEL if steps is None else steps

    def spend(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise FuelExhausted("reduction step bound exceeded")


def set_default_fuel(steps: int) -> None:
    global DEFAULT_FUEL
    DEFAULT_FUEL = steps


def fuel_from_env() -> Optional[int]:
    raw = os.environ.get("COVERTT_FUEL")
    return int(raw) if raw else None


# -- match reduction ---------------------------------------------------------


@dataclass(frozen=True)
class Matched:
    branch: int
    solution: Subst


@dataclass(frozen=True)
class Stuck:
    reason: str = ""


@dataclass(frozen=True)
class NoBranch:
    pass


MatchResult = Union[Matched, Stuck, NoBranch]


class _NoMatch(Exception):
    pass


def _match_pattern(sig, branch: Branch, scrut: Sequence[Term], fuel: Fuel) -> MatchResult:
    m = len(branch.tel)
    solution: list[Optional[Term]] = [None] * m
    forced: list[tuple[Term, Term, bool]] = []

    def go(p: Term, v: Term) -> None:
        match p:
            case Var(i):
                k = m - 1 - i
                if solution[k] is None:
                    solution[k] = v
                else:
                    forced.append((p, v, False))
            case DataCon(name, args):
                w = whnf(sig, v, fuel)
                if isinstance(w, DataCon):
                    if w.name != name:
                        raise _NoMatch
                    for a, b in zip(args, w.args):
                        go(a, b)
                else:
                    forced.append((p, w, True))
            case Refl(arg):
                w = whnf(sig, v, fuel)
                if isinstance(w, Refl):
                    forced.append((arg, w.arg, False))
                else:
                    forced.append((p, w, True))
            case _:
                forced.append((p, v, False))

    try:
        for p, v in zip(branch.pattern, scrut):
            go(p, v)
    except _NoMatch:
        return NoBranch()
    if any(s is None for s in solution):
        return Stuck("pattern variable not determined by the scrutinee")
    sol = Subst(tuple(solution), branch.tel)
    for p, v, rigid in forced:
        if not conv(sig, None, apply_subst(p, sol), v, fuel):
            return Stuck("forced position not convertible" if not rigid else "scrutinee not constructor-headed")
    return Matched(-1, sol)


def match_branch(sig: Signature, scrut: Sequence[Term], branches: Sequence[Branch], fuel: Optional[Fuel] = None) -> MatchResult:
    """Find the branch whose pattern, instantiated by some solution, is the scrutinee."""
    fuel = fuel or Fuel()
    stuck: Optional[Stuck] = None
    for j, br in enumerate(branches):
        r = _match_pattern(sig, br, tuple(scrut), fuel)
        if isinstance(r, Matched):
            return Matched(j, r.solution)
        if isinstance(r, Stuck) and stuck is None:
            stuck = r
    return stuck if stuck is not None else NoBranch()


# -- whnf / normalise --------------------------------------------------------


def whnf(sig: Signature, t: Term, fuel: Optional[Fuel] = None, unfold: bool = True) -> Term:
    fuel = fuel or Fuel()
    while True:
        match t:
            case App(fn, arg):
                head = whnf(sig, fn, fuel, unfold)
                if isinstance(head, Lam):
                    fuel.spend()
                    t = instantiate(head.body, [arg])
                    continue
                return t if head is fn else App(head, arg, span=t.span)
            case Match(scrut, _, _, branches):
                r = match_branch(sig, scrut, branches, fuel)
                if isinstance(r, Matched):
                    fuel.spend()
                    t = apply_subst(branches[r.branch].body, r.solution)
                    continue
                return t
            case Def(name) if unfold:
                info = sig.definition(name)
                if info.body is None:
                    return t
                fuel.spend()
                t = info.body
                continue
        return t


def _spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, args[::-1]


def normalize(sig: Signature, t: Term, fuel: Optional[Fuel] = None) -> Term:
    fuel = fuel or Fuel()

    def nf(t: Term) -> Term:
        t = whnf(sig, t, fuel, unfold=False)
        head, args = _spine(t)
        if isinstance(head, Def) and sig.definition(head.name).body is not None:
            w = whnf(sig, t, fuel)
            if isinstance(_spine(w)[0], Match):
                # unfolding only exposes a stuck match; keep the call folded
                out = head
                for a in args:
                    out = App(out, nf(a))
                return out
            t = w
        match t:
            case Var() | Type() | Def():
                return t
            case Pi(name, dom, cod):
                return Pi(name, nf(dom), nf(cod))
            case Lam(name, body):
                return Lam(name, nf(body))
            case App(fn, arg):
                return App(nf(fn), nf(arg))
            case Eq(ty, lhs, rhs):
                return Eq(nf(ty), nf(lhs), nf(rhs))
            case Refl(arg):
                return Refl(nf(arg))
            case TyCon(name, args):
                return TyCon(name, tuple(nf(a) for a in args))
            case DataCon(name, args):
                return DataCon(name, tuple(nf(a) for a in args))
            case Match(scrut, tel, motive, branches):
                return Match(
                    tuple(nf(s) for s in scrut),
                    nf_tel(tel),
                    nf(motive),
                    tuple(Branch(nf_tel(b.tel), tuple(nf(p) for p in b.pattern), nf(b.body)) for b in branches),
                )
        raise TypeError(f"not a term: {t!r}")

    def nf_tel(tel: Telescope) -> Telescope:
        return Telescope(tuple(type(b)(b.name, nf(b.type)) for b in tel))

    return nf(t)


# -- conversion --------------------------------------------------------------


def conv(sig: Signature, ctx: Optional[Telescope], t1: Term, t2: Term, fuel: Optional[Fuel] = None) -> bool:
    """Definitional equality.

    Compares weak-head normal forms structurally, reducing subterms only when
    they differ syntactically. On terminating terms this coincides with
    comparing full normal forms; the syntactic short cut keeps recursive
    definitions from being unfolded needlessly. ``ctx`` is accepted for the
    contract but not needed: the comparison is untyped.
    """
    fuel = fuel or Fuel()
    return _conv(sig, t1, t2, fuel)


def _conv(sig: Signature, a: Term, b: Term, fuel: Fuel) -> bool:
    if a == b:
        return True
    a = whnf(sig, a, fuel)
    b = whnf(sig, b, fuel)
    if a == b:
        return True
    match a, b:
        case Var(i), Var(j):
            return i == j
        case Pi(_, d1, c1), Pi(_, d2, c2):
            return _conv(sig, d1, d2, fuel) and _conv(sig, c1, c2, fuel)
        case Lam(_, b1), Lam(_, b2):
            return _conv(sig, b1, b2, fuel)
        case App(f1, x1), App(f2, x2):
            return _conv(sig, f1, f2, fuel) and _conv(sig, x1, x2, fuel)
        case Eq(t1, l1, r1), Eq(t2, l2, r2):
            return _conv(sig, t1, t2, fuel) and _conv(sig, l1, l2, fuel) and _conv(sig, r1, r2, fuel)
        case Refl(x1), Refl(x2):
            return _conv(sig, x1, x2, fuel)
        case TyCon(n1, a1), TyCon(n2, a2):
            return n1 == n2 and _conv_all(sig, a1, a2, fuel)
        case DataCon(n1, a1), DataCon(n2, a2):
            return n1 == n2 and _conv_all(sig, a1, a2, fuel)
        case Match(s1, tel1, m1, br1), Match(s2, tel2, m2, br2):
            return (
                _conv_all(sig, s1, s2, fuel)
                and _conv_tel(sig, tel1, tel2, fuel)
                and _conv(sig, m1, m2, fuel)
                and len(br1) == len(br2)
                and all(
                    _conv_tel(sig, x.tel, y.tel, fuel)
                    and _conv_all(sig, x.pattern, y.pattern, fuel)
                    and _conv(sig, x.body, y.body, fuel)
                    for x, y in zip(br1, br2)
                )
            )
    return False


def _conv_all(sig, xs, ys, fuel) -> bool:
    return len(xs) == len(ys) and all(_conv(sig, x, y, fuel) for x, y in zip(xs, ys))


def _conv_tel(sig, t1: Telescope, t2: Telescope, fuel) -> bool:
    return _conv_all(sig, t1.types, t2.types, fuel)
