"""Bidirectional type checking.

``infer`` synthesises types for variables, applications, formers,
constructors and matches; ``check`` switches to checking mode for ``Lam`` and
``Refl`` and otherwise compares the inferred type by conversion. Match
coverage is delegated to :mod:`covertt.coverage`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from covertt import coverage
from covertt.conversion import Fuel, FuelExhausted, conv, normalize, whnf
from covertt.syntax import (
    EMPTY,
    App,
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
    mentions_def,
    shift,
)

# the typing rule each error kind is a failure of
RULE_OF_KIND = {
    "UnboundVariable": "TyVar",
    "NotAFunction": "TyApp",
    "TypeMismatch": "TypeConv",
    "NotAType": "CtxCons",
    "BadConstructorArity": "TyCtor",
    "NotCovering": "TyCase",
    "BranchTypeMismatch": "TyCase",
    "IllFormedTelescope": "EnvCons",
    "UniverseHasNoType": "TyInd",
    "CannotInfer": "TyLam",
}


class TypeCheckError(Exception):
    def __init__(
        self,
        kind: str,
        message: str,
        span=None,
        expected: Optional[Term] = None,
        got: Optional[Term] = None,
        cover_error: Optional[coverage.CoverError] = None,
        index: Optional[int] = None,
    ):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.expected = expected
        self.got = got
        self.cover_error = cover_error
        self.index = index
        self.decl: Optional[str] = None

    @property
    def rule(self) -> str:
        return RULE_OF_KIND.get(self.kind, "")

    def __str__(self) -> str:
        where = f" in {self.decl}" if self.decl else ""
        return f"{self.kind}{where}: {self.message}"


def _show(t: Term, ctx: Telescope, sig: Signature) -> str:
    from covertt.pretty import show

    return show(t, ctx.names, sig)


def _nf(sig, t, fuel) -> Term:
    try:
        return normalize(sig, t, Fuel(2_000))
    except FuelExhausted:
        return t


class Checker:
    def __init__(self, sig: Signature, fuel: Optional[Fuel] = None):
        self.sig = sig
        self.fuel = fuel or Fuel()

    # -- contexts and substitutions

    def check_telescope(self, tel: Telescope, ctx: Telescope = EMPTY) -> None:
        cur = ctx
        for b in tel:
            self.check_type(cur, b.type)
            cur = cur.extend(b.name, b.type)

    def check_subst(self, ctx: Telescope, env, tel: Telescope) -> Subst:
        terms = tuple(env)
        if len(terms) != len(tel):
            raise TypeCheckError("IllFormedTelescope", f"expected {len(tel)} terms, got {len(terms)}")
        for k, b in enumerate(tel):
            self.check(ctx, terms[k], instantiate(b.type, terms[:k], strict=True))
        return Subst(terms, tel)

    def check_type(self, ctx: Telescope, t: Term) -> None:
        if isinstance(t, Type):
            return
        ty = self.infer(ctx, t)
        if not isinstance(whnf(self.sig, ty, self.fuel), Type):
            raise TypeCheckError("NotAType", f"{_show(t, ctx, self.sig)} is not a type", t.span)

    # -- terms

    def infer(self, ctx: Telescope, t: Term) -> Term:
        try:
            return self._infer(ctx, t)
        except TypeCheckError as e:
            if e.span is None:
                e.span = t.span
            raise

    def check(self, ctx: Telescope, t: Term, ty: Term) -> None:
        try:
            self._check(ctx, t, ty)
        except TypeCheckError as e:
            if e.span is None:
                e.span = t.span
            raise

    def _infer(self, ctx: Telescope, t: Term) -> Term:
        sig = self.sig
        match t:
            case Var(i, name):
                if i >= len(ctx):
                    raise TypeCheckError("UnboundVariable", f"variable {name or i} is not in scope")
                return shift(ctx[len(ctx) - 1 - i].type, i + 1)
            case Type():
                raise TypeCheckError("UniverseHasNoType", "Type has no type")
            case Def(name):
                if not sig.has_def(name):
                    raise TypeCheckError("UnboundVariable", f"unknown definition {name}")
                return sig.definition(name).type
            case Pi(name, dom, cod):
                self.check_type(ctx, dom)
                self.check_type(ctx.extend(name, dom), cod)
                return Type()
            case Lam():
                raise TypeCheckError("CannotInfer", "cannot infer the type of a lambda; add an annotation")
            case App(Lam(name, body), arg):
                # a redex: the argument's type annotates the binder
                aty = self.infer(ctx, arg)
                return instantiate(self.infer(ctx.extend(name, aty), body), [arg])
            case App(fn, arg):
                fty = whnf(sig, self.infer(ctx, fn), self.fuel)
                if not isinstance(fty, Pi):
                    raise TypeCheckError("NotAFunction", f"{_show(fn, ctx, sig)} is applied but has type {_show(fty, ctx, sig)}", fn.span)
                self.check(ctx, arg, fty.dom)
                return instantiate(fty.cod, [arg])
            case Eq(ty, lhs, rhs):
                self.check_type(ctx, ty)
                self.check(ctx, lhs, ty)
                self.check(ctx, rhs, ty)
                return Type()
            case Refl(arg):
                return Eq(self.infer(ctx, arg), arg, arg)
            case TyCon(name, args):
                if not sig.has_tycon(name):
                    raise TypeCheckError("UnboundVariable", f"unknown type constructor {name}")
                params = sig.params(name)
                if len(args) != len(params):
                    raise TypeCheckError("BadConstructorArity", f"{name} takes {len(params)} arguments, got {len(args)}")
                self.check_subst(ctx, args, params)
                return Type()
            case DataCon(name, args):
                if not sig.has_datacon(name):
                    raise TypeCheckError("UnboundVariable", f"unknown constructor {name}")
                tel = sig.con_telescope(name)
                if len(args) != len(tel):
                    raise TypeCheckError("BadConstructorArity", f"{name} takes {len(tel)} arguments (parameters then fields), got {len(args)}")
                self.check_subst(ctx, args, tel)
                owner = sig.datacon(name).owner
                return TyCon(owner, tuple(args[: len(sig.params(owner))]))
            case Match():
                return self._infer_match(ctx, t)
        raise TypeError(f"not a term: {t!r}")

    def _infer_match(self, ctx: Telescope, t: Match) -> Term:
        sig = self.sig
        self.check_telescope(t.tel)
        self.check_type(t.tel, t.motive)
        self.check_subst(ctx, t.scrut, t.tel)
        for i, br in enumerate(t.branches):
            self.check_telescope(br.tel)
            self.check_subst(br.tel, br.pattern, t.tel)
        try:
            coverage.check_cover(sig, t.tel, [(br.tel, br.pattern) for br in t.branches], self.fuel)
        except coverage.CoverageError as e:
            raise TypeCheckError("NotCovering", str(e), cover_error=e.error) from None
        for i, br in enumerate(t.branches):
            want = apply_subst(t.motive, br.pattern)
            try:
                self.check(br.tel, br.body, want)
            except TypeCheckError as e:
                if e.kind != "TypeMismatch":
                    raise
                raise TypeCheckError(
                    "BranchTypeMismatch",
                    f"branch {i}: {e.message}",
                    e.span or br.body.span,
                    expected=e.expected,
                    got=e.got,
                    index=i,
                ) from None
        return apply_subst(t.motive, t.scrut)

    def _check(self, ctx: Telescope, t: Term, ty: Term) -> None:
        sig = self.sig
        match t:
            case Lam(name, body):
                w = whnf(sig, ty, self.fuel)
                if not isinstance(w, Pi):
                    raise TypeCheckError("TypeMismatch", f"a lambda cannot have type {_show(ty, ctx, sig)}", expected=ty)
                self.check(ctx.extend(name, w.dom), body, w.cod)
                return
            case Refl(arg):
                w = whnf(sig, ty, self.fuel)
                if isinstance(w, Eq):
                    self.check(ctx, arg, w.ty)
                    if conv(sig, ctx, arg, w.lhs, self.fuel) and conv(sig, ctx, arg, w.rhs, self.fuel):
                        return
                got = Eq(w.ty, arg, arg) if isinstance(w, Eq) else None
                self._mismatch(ctx, ty, got, t)
        got = self.infer(ctx, t)
        if not conv(sig, ctx, got, ty, self.fuel):
            self._mismatch(ctx, ty, got, t)

    def _mismatch(self, ctx, expected, got, t) -> None:
        sig = self.sig
        e = _nf(sig, expected, self.fuel)
        if got is None:
            raise TypeCheckError("TypeMismatch", f"refl cannot have type {_show(e, ctx, sig)}", expected=e)
        g = _nf(sig, got, self.fuel)
        raise TypeCheckError(
            "TypeMismatch",
            f"expected {_show(e, ctx, sig)}, got {_show(g, ctx, sig)}",
            expected=e,
            got=g,
        )


# -- module-level API --------------------------------------------------------


def check_telescope(sig: Signature, tel: Telescope, ctx: Telescope = EMPTY, fuel: Optional[Fuel] = None) -> None:
    Checker(sig, fuel).check_telescope(tel, ctx)


def check_subst(sig: Signature, ctx: Telescope, env, tel: Telescope, fuel: Optional[Fuel] = None) -> Subst:
    return Checker(sig, fuel).check_subst(ctx, env, tel)


def infer(sig: Signature, ctx: Telescope, t: Term, fuel: Optional[Fuel] = None) -> Term:
    return Checker(sig, fuel).infer(ctx, t)


def check(sig: Signature, ctx: Telescope, t: Term, ty: Term, fuel: Optional[Fuel] = None) -> None:
    Checker(sig, fuel).check(ctx, t, ty)


def check_type(sig: Signature, ctx: Telescope, t: Term, fuel: Optional[Fuel] = None) -> None:
    Checker(sig, fuel).check_type(ctx, t)


@dataclass(frozen=True)
class DeclReport:
    name: str
    kind: str  # "data" | "con" | "def"
    recursive: bool = False


@dataclass(frozen=True)
class SignatureReport:
    decls: tuple[DeclReport, ...] = field(default=())

    def recursive(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decls if d.recursive)


def check_signature(sig: Signature, fuel: Optional[Fuel] = None) -> SignatureReport:
    """Check datatypes in the full signature, then definitions in order."""
    fuel = fuel or Fuel()
    out: list[DeclReport] = []
    checker = Checker(sig, fuel)

    def attach(e: TypeCheckError, name: str) -> TypeCheckError:
        if e.decl is None:
            e.decl = name
        return e

    names = [n for n, _ in sig.tycons] + [n for n, _ in sig.datacons] + [n for n, _ in sig.defs]
    seen = set()
    for n in names:
        if n in seen:
            raise attach(TypeCheckError("IllFormedTelescope", f"{n} is declared twice"), n)
        seen.add(n)

    for name, params in sig.tycons:
        try:
            checker.check_telescope(params)
        except TypeCheckError as e:
            raise attach(e, name)
        out.append(DeclReport(name, "data"))
    for name, info in sig.datacons:
        try:
            if not sig.has_tycon(info.owner):
                raise TypeCheckError("UnboundVariable", f"constructor {name} belongs to unknown type {info.owner}")
            checker.check_telescope(info.fields, sig.params(info.owner))
        except TypeCheckError as e:
            raise attach(e, name)
        out.append(DeclReport(name, "con"))

    partial = Signature(sig.tycons, sig.datacons, ())
    for name, info in sig.defs:
        try:
            Checker(partial, fuel).check_type(EMPTY, info.type)
            partial = partial.add_def(name, info.type, None)
            if info.body is None:
                raise TypeCheckError("CannotInfer", f"definition {name} has no body")
            Checker(partial, fuel).check(EMPTY, info.body, info.type)
        except TypeCheckError as e:
            raise attach(e, name)
        partial = Signature(partial.tycons, partial.datacons, partial.defs[:-1] + ((name, info),))
        out.append(DeclReport(name, "def", recursive=mentions_def(info.body, name)))
    return SignatureReport(tuple(out))
