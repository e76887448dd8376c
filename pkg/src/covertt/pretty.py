"""Printing kernel terms back to concrete syntax.

Output parses back to the same kernel term. Binder names are freshened
against everything in scope, including global names, since the parser lets a
local shadow a constructor.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from covertt.syntax import (
    App,
    DataCon,
    Def,
    Eq,
    Lam,
    Match,
    Pi,
    Refl,
    Signature,
    Telescope,
    Term,
    TyCon,
    Type,
    Var,
    free_vars,
)

KEYWORDS = frozenset({"Type", "Pi", "Eq", "refl", "match", "to", "data", "def"})


class _Printer:
    def __init__(self, sig: Optional[Signature]):
        self.sig = sig
        self.globals: set[str] = set(KEYWORDS)
        if sig is not None:
            self.globals |= {n for n, _ in sig.tycons} | {n for n, _ in sig.datacons} | {n for n, _ in sig.defs}

    def fresh(self, name: str, names: Sequence[str]) -> str:
        base = name if name and name != "_" else "x"
        taken = set(names) | self.globals
        if base not in taken:
            return base
        stem = base.rstrip("0123456789")
        k = 1
        while f"{stem}{k}" in taken:
            k += 1
        return f"{stem}{k}"

    # prec: 0 binders/arrows, 1 application, 2 atoms
    def term(self, t: Term, names: tuple, prec: int = 0) -> str:
        match t:
            case Var(i, name):
                if i < len(names):
                    return names[len(names) - 1 - i]
                return f"#{i}"
            case Type():
                return "Type"
            case Def(name):
                return name
            case TyCon(name, args) | DataCon(name, args):
                if not args:
                    return name
                return f"{name}({', '.join(self.term(a, names) for a in args)})"
            case Eq(ty, lhs, rhs):
                return f"Eq({self.term(ty, names)}, {self.term(lhs, names)}, {self.term(rhs, names)})"
            case Refl(arg):
                return f"refl({self.term(arg, names)})"
            case App(fn, arg):
                s = f"{self.term(fn, names, 1)} {self.term(arg, names, 2)}"
                return s if prec <= 1 else f"({s})"
            case Pi(name, dom, cod):
                if 0 not in free_vars(cod):
                    s = f"{self.term(dom, names, 1)} -> {self.term(cod, names + ('_',), 0)}"
                else:
                    s = self._pi(t, names)
                return s if prec == 0 else f"({s})"
            case Lam():
                xs = []
                body = t
                inner = names
                while isinstance(body, Lam):
                    x = self.fresh(body.name, inner)
                    xs.append(x)
                    inner = inner + (x,)
                    body = body.body
                s = f"\\{' '.join(xs)}. {self.term(body, inner)}"
                return s if prec == 0 else f"({s})"
            case Match():
                s = self._match(t, names)
                return s if prec == 0 else f"({s})"
        raise TypeError(f"not a term: {t!r}")

    def _pi(self, t: Pi, names: tuple) -> str:
        binders = []
        inner = names
        while isinstance(t, Pi) and 0 in free_vars(t.cod):
            x = self.fresh(t.name, inner)
            binders.append(f"{x} : {self.term(t.dom, inner)}")
            inner = inner + (x,)
            t = t.cod
        return f"Pi ({', '.join(binders)}). {self.term(t, inner)}"

    def tel(self, tel: Telescope, names: tuple = ()) -> tuple[str, tuple]:
        parts = []
        inner = names
        for b in tel:
            x = self.fresh(b.name, inner)
            parts.append(f"{x} : {self.term(b.type, inner)}")
            inner = inner + (x,)
        return f"({', '.join(parts)})", inner[len(names):]

    def pattern(self, pats: Iterable[Term], names: tuple) -> str:
        bound: set[int] = set()
        n = len(names)

        def atom(p: Term) -> str:
            return "." + self.term(p, names, 2)

        def go(p: Term, inert: bool) -> str:
            if isinstance(p, Var) and p.index < n and p.index not in bound:
                bound.add(p.index)
                return names[n - 1 - p.index]
            if inert:
                return atom(p)
            match p:
                case DataCon(name, args):
                    if not args:
                        return name
                    npar = self._npar(name)
                    return f"{name}({', '.join(go(a, i < npar) for i, a in enumerate(args))})"
                case Refl(arg):
                    return f"refl({go(arg, True)})"
            return atom(p)

        return f"({', '.join(go(p, False) for p in pats)})"

    def _npar(self, con: str) -> int:
        if self.sig is None or not self.sig.has_datacon(con):
            return 0
        return len(self.sig.params(self.sig.datacon(con).owner))

    def _match(self, t: Match, names: tuple) -> str:
        scrut = ", ".join(self.term(s, names) for s in t.scrut)
        xi, xi_names = self.tel(t.tel)
        motive = self.term(t.motive, xi_names)
        out = [f"match ({scrut}) : {xi} to {motive} {{"]
        for br in t.branches:
            delta, d_names = self.tel(br.tel)
            out.append(f"  | {delta}. {self.pattern(br.pattern, d_names)} => {self.term(br.body, d_names)}")
        out.append("}")
        return "\n".join(out)


def show(t: Term, names: Sequence[str] = (), sig: Optional[Signature] = None) -> str:
    return _Printer(sig).term(t, tuple(names))


def show_tel(tel: Telescope, sig: Optional[Signature] = None) -> str:
    return _Printer(sig).tel(tel)[0]


def show_pattern(tel: Telescope, pattern: Sequence[Term], sig: Optional[Signature] = None) -> str:
    """``(x : A, ...). (p1, ...)`` with forced positions dotted."""
    pr = _Printer(sig)
    delta, names = pr.tel(tel)
    return f"{delta}. {pr.pattern(pattern, names)}"


def show_signature(sig: Signature) -> str:
    pr = _Printer(sig)
    chunks = []
    emitted: set[str] = set()
    # data declarations first, in order; each with its constructors
    for name, params in sig.tycons:
        ptel, pnames = pr.tel(params)
        cons = []
        for c in sig.constructors(name):
            fields = sig.datacon(c).fields
            if len(fields):
                ftel, _ = pr.tel(fields, pnames)
                cons.append(f"{c}{ftel}")
            else:
                cons.append(c)
        head = f"data {name}{ptel if len(params) else ''}"
        body = "; ".join(cons)
        chunks.append(f"{head} {{ {body} }}" if cons else f"{head} {{ }}")
        emitted.add(name)
    for name, info in sig.defs:
        ty = pr.term(info.type, ())
        if info.body is None:
            raise ValueError(f"definition {name} has no body")
        chunks.append(f"def {name} : {ty} :=\n  {pr.term(info.body, ())}")
    return "\n\n".join(chunks) + "\n"
