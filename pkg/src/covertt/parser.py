"""Concrete syntax: a hand-written lexer and recursive-descent parser.

The parser produces a named surface tree with byte spans. :func:`elaborate`
resolves names to de Bruijn indices and builds the kernel signature.

Grammar sketch::

    file   ::= decl*
    decl   ::= 'data' NAME ['(' binders ')'] '{' [con (';' con)* [';']] '}'
             | 'def' NAME ':' term ':=' term
    con    ::= NAME ['(' binders ')']
    term   ::= 'Pi' '(' binders ')' '.' term
             | '\\' NAME+ '.' term
             | 'match' '(' terms ')' ':' '(' binders ')' 'to' term '{' branch* '}'
             | app ['->' term]
    branch ::= '|' '(' binders ')' '.' '(' terms ')' '=>' term
    app    ::= atom+
    atom   ::= NAME | NAME'(' terms ')' | 'Type' | 'Eq' '(' term ',' term ',' term ')'
             | 'refl' '(' term ')' | '(' term ')' | '.' atom
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
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
    Telescope,
    Term,
    TyCon,
    Type,
    Var,
)

Span = tuple[int, int]


class ParseError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


class ScopeError(Exception):
    """A name that does not resolve (reported as UnboundVariable)."""

    def __init__(self, message: str, span: Optional[Span]):
        super().__init__(message)
        self.message = message
        self.span = span


# -- surface tree ------------------------------------------------------------


@dataclass(frozen=True)
class SName:
    name: str
    span: Span


@dataclass(frozen=True)
class SType:
    span: Span


@dataclass(frozen=True)
class SPi:
    binders: tuple["SBinder", ...]
    body: "STerm"
    span: Span


@dataclass(frozen=True)
class SArrow:
    dom: "STerm"
    cod: "STerm"
    span: Span


@dataclass(frozen=True)
class SLam:
    names: tuple[str, ...]
    body: "STerm"
    span: Span


@dataclass(frozen=True)
class SApp:
    fn: "STerm"
    arg: "STerm"
    span: Span


@dataclass(frozen=True)
class SCall:
    name: str
    args: tuple["STerm", ...]
    span: Span


@dataclass(frozen=True)
class SEq:
    ty: "STerm"
    lhs: "STerm"
    rhs: "STerm"
    span: Span


@dataclass(frozen=True)
class SRefl:
    arg: "STerm"
    span: Span


@dataclass(frozen=True)
class SBranch:
    tel: tuple["SBinder", ...]
    pattern: tuple["STerm", ...]
    body: "STerm"
    span: Span


@dataclass(frozen=True)
class SMatch:
    scrut: tuple["STerm", ...]
    tel: tuple["SBinder", ...]
    motive: "STerm"
    branches: tuple[SBranch, ...]
    span: Span


STerm = Union[SName, SType, SPi, SArrow, SLam, SApp, SCall, SEq, SRefl, SMatch]


@dataclass(frozen=True)
class SBinder:
    name: str
    type: STerm
    span: Span


@dataclass(frozen=True)
class ConDecl:
    name: str
    fields: tuple[SBinder, ...]
    span: Span


@dataclass(frozen=True)
class DataDecl:
    name: str
    params: tuple[SBinder, ...]
    cons: tuple[ConDecl, ...]
    span: Span


@dataclass(frozen=True)
class DefDecl:
    name: str
    type: STerm
    body: STerm
    span: Span


Decl = Union[DataDecl, DefDecl]


@dataclass(frozen=True)
class SourceFile:
    decls: tuple[Decl, ...]
    text: str = field(default="", repr=False, compare=False)


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>:=|=>|->|[(){}.,:;|\\])
    """,
    re.VERBOSE,
)

KEYWORDS = {"data", "def", "Type", "Pi", "Eq", "refl", "match", "to"}


@dataclass(frozen=True)
class Token:
    kind: str  # "name", "kw", "sym", "eof"
    text: str
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", (i, i + 1))
        kind = m.lastgroup
        if kind == "name":
            word = m.group()
            out.append(Token("kw" if word in KEYWORDS else "name", word, m.start(), m.end()))
        elif kind == "sym":
            out.append(Token("sym", m.group(), m.start(), m.end()))
        i = m.end()
    out.append(Token("eof", "", len(text), len(text)))
    return out


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "kw")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"'{text}'")
        return self.advance()

    def name(self) -> Token:
        if self.tok.kind != "name":
            self.fail("a name")
        return self.advance()

    def fail(self, wanted: str):
        if self.tok.kind == "eof":
            opener = self._unclosed()
            if opener is not None:
                raise ParseError(
                    f"unexpected end of input: '{opener.text}' is never closed (expected {wanted})",
                    (opener.start, opener.end),
                )
            raise ParseError(f"expected {wanted}, found end of input", (self.tok.start, self.tok.end))
        raise ParseError(f"expected {wanted}, found '{self.tok.text}'", (self.tok.start, self.tok.end))

    def _unclosed(self) -> Optional[Token]:
        stack = []
        for t in self.toks[: self.i]:
            if t.kind != "sym":
                continue
            if t.text in "({":
                stack.append(t)
            elif t.text in ")}" and stack:
                stack.pop()
        return stack[-1] if stack else None

    def last_end(self) -> int:
        return self.toks[self.i - 1].end

    # declarations

    def file(self) -> SourceFile:
        decls = []
        while self.tok.kind != "eof":
            if self.at("data"):
                decls.append(self.data())
            elif self.at("def"):
                decls.append(self.definition())
            else:
                raise ParseError(f"expected 'data' or 'def', found '{self.tok.text}'", (self.tok.start, self.tok.end))
        return SourceFile(tuple(decls), self.text)

    def data(self) -> DataDecl:
        start = self.expect("data").start
        name = self.name().text
        params = self.binders() if self.at("(") else ()
        self.expect("{")
        cons = []
        while not self.at("}"):
            ctok = self.name()
            fields = self.binders() if self.at("(") else ()
            cons.append(ConDecl(ctok.text, fields, (ctok.start, self.last_end())))
            if not self.at("}"):
                self.expect(";")
        self.expect("}")
        return DataDecl(name, params, tuple(cons), (start, self.last_end()))

    def definition(self) -> DefDecl:
        start = self.expect("def").start
        name = self.name().text
        self.expect(":")
        ty = self.term()
        self.expect(":=")
        body = self.term()
        return DefDecl(name, ty, body, (start, self.last_end()))

    def binders(self) -> tuple[SBinder, ...]:
        self.expect("(")
        out = []
        while not self.at(")"):
            ntok = self.name()
            self.expect(":")
            ty = self.term()
            out.append(SBinder(ntok.text, ty, (ntok.start, self.last_end())))
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return tuple(out)

    def terms(self) -> tuple[STerm, ...]:
        self.expect("(")
        out = []
        while not self.at(")"):
            out.append(self.term())
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return tuple(out)

    # terms

    def term(self) -> STerm:
        start = self.tok.start
        if self.at("Pi"):
            self.advance()
            bs = self.binders()
            self.expect(".")
            body = self.term()
            return SPi(bs, body, (start, self.last_end()))
        if self.at("\\"):
            self.advance()
            names = [self.name().text]
            while self.tok.kind == "name":
                names.append(self.advance().text)
            self.expect(".")
            body = self.term()
            return SLam(tuple(names), body, (start, self.last_end()))
        if self.at("match"):
            return self.match()
        lhs = self.app()
        if self.at("->"):
            self.advance()
            rhs = self.term()
            return SArrow(lhs, rhs, (start, self.last_end()))
        return lhs

    def match(self) -> SMatch:
        start = self.expect("match").start
        scrut = self.terms()
        self.expect(":")
        tel = self.binders()
        self.expect("to")
        motive = self.term()
        self.expect("{")
        branches = []
        while self.at("|"):
            bstart = self.advance().start
            btel = self.binders()
            self.expect(".")
            pat = self.terms()
            self.expect("=>")
            body = self.term()
            branches.append(SBranch(btel, pat, body, (bstart, self.last_end())))
        self.expect("}")
        return SMatch(scrut, tel, motive, tuple(branches), (start, self.last_end()))

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind == "name" or (t.kind in ("sym", "kw") and t.text in ("(", ".", "Type", "Eq", "refl"))

    def app(self) -> STerm:
        start = self.tok.start
        fn = self.atom()
        while self.starts_atom():
            arg = self.atom()
            fn = SApp(fn, arg, (start, self.last_end()))
        return fn

    def atom(self) -> STerm:
        t = self.tok
        start = t.start
        if t.kind == "name":
            self.advance()
            if self.at("(") and self.tok.start == t.end:
                args = self.terms()
                return SCall(t.text, args, (start, self.last_end()))
            return SName(t.text, (t.start, t.end))
        if self.at("Type"):
            self.advance()
            return SType((t.start, t.end))
        if self.at("Eq"):
            self.advance()
            args = self.terms()
            if len(args) != 3:
                raise ParseError("Eq takes a type and two terms", (start, self.last_end()))
            return SEq(*args, (start, self.last_end()))
        if self.at("refl"):
            self.advance()
            args = self.terms()
            if len(args) != 1:
                raise ParseError("refl takes one term", (start, self.last_end()))
            return SRefl(args[0], (start, self.last_end()))
        if self.at("."):
            # inaccessible marker; purely documentary
            self.advance()
            return self.atom()
        if self.at("("):
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        self.fail("a term")


def parse(text: str) -> SourceFile:
    return _Parser(text).file()


def parse_telescope(text: str) -> tuple[SBinder, ...]:
    """Parse ``(x : A, y : B)``; the empty string is the empty telescope."""
    p = _Parser(text)
    binders = p.binders() if p.at("(") else ()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return binders


def parse_term(text: str) -> STerm:
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected '{p.tok.text}' after term", (p.tok.start, p.tok.end))
    return t


# -- elaboration -------------------------------------------------------------


class _Scope:
    def __init__(self, sig: Signature, locals_: tuple[str, ...] = ()):
        self.sig = sig
        self.locals = locals_

    def bind(self, name: str) -> "_Scope":
        return _Scope(self.sig, self.locals + (name,))

    def closed(self) -> "_Scope":
        return _Scope(self.sig, ())

    def local(self, name: str) -> Optional[int]:
        for k in range(len(self.locals) - 1, -1, -1):
            if self.locals[k] == name:
                return len(self.locals) - 1 - k
        return None


def _elab(t: STerm, sc: _Scope) -> Term:
    sig = sc.sig
    match t:
        case SName(name, span):
            i = sc.local(name)
            if i is not None:
                return Var(i, name, span=span)
            if sig.has_def(name):
                return Def(name, span=span)
            if sig.has_tycon(name):
                return TyCon(name, (), span=span)
            if sig.has_datacon(name):
                return DataCon(name, (), span=span)
            raise ScopeError(f"unbound name '{name}'", span)
        case SType(span):
            return Type(span=span)
        case SPi(binders, body, span):
            return _elab_pi(binders, body, sc, span)
        case SArrow(dom, cod, span):
            return Pi("_", _elab(dom, sc), _elab(cod, sc.bind("")), span=span)
        case SLam(names, body, span):
            inner = sc
            for n in names:
                inner = inner.bind(n)
            out = _elab(body, inner)
            for n in reversed(names):
                out = Lam(n, out, span=span)
            return out
        case SApp(fn, arg, span):
            return App(_elab(fn, sc), _elab(arg, sc), span=span)
        case SCall(name, args, span):
            i = sc.local(name)
            if i is not None or sig.has_def(name):
                out = Var(i, name) if i is not None else Def(name)
                for a in args:
                    out = App(out, _elab(a, sc), span=span)
                return out
            elab_args = tuple(_elab(a, sc) for a in args)
            if sig.has_tycon(name):
                return TyCon(name, elab_args, span=span)
            if sig.has_datacon(name):
                return DataCon(name, elab_args, span=span)
            raise ScopeError(f"unbound name '{name}'", span)
        case SEq(ty, lhs, rhs, span):
            return Eq(_elab(ty, sc), _elab(lhs, sc), _elab(rhs, sc), span=span)
        case SRefl(arg, span):
            return Refl(_elab(arg, sc), span=span)
        case SMatch(scrut, tel, motive, branches, span):
            scrut_t = tuple(_elab(s, sc) for s in scrut)
            xi, xi_sc = _elab_tel(tel, sc.closed())
            motive_t = _elab(motive, xi_sc)
            brs = []
            for b in branches:
                delta, d_sc = _elab_tel(b.tel, sc.closed())
                if len(b.pattern) != len(tel):
                    raise ScopeError(f"pattern has {len(b.pattern)} positions but the match has {len(tel)} scrutinees", b.span)
                pat = tuple(_elab(p, d_sc) for p in b.pattern)
                brs.append(Branch(delta, pat, _elab(b.body, d_sc)))
            if len(scrut) != len(tel):
                raise ScopeError(f"{len(scrut)} scrutinees for a telescope of length {len(tel)}", span)
            return Match(scrut_t, xi, motive_t, tuple(brs), span=span)
    raise TypeError(f"not a surface term: {t!r}")


def _elab_pi(binders, body, sc: _Scope, span) -> Term:
    if not binders:
        return _elab(body, sc)
    b = binders[0]
    dom = _elab(b.type, sc)
    return Pi(b.name, dom, _elab_pi(binders[1:], body, sc.bind(b.name), span), span=span)


def _elab_tel(binders, sc: _Scope) -> tuple[Telescope, _Scope]:
    entries = []
    for b in binders:
        entries.append((b.name, _elab(b.type, sc)))
        sc = sc.bind(b.name)
    return Telescope.of(*entries), sc


@dataclass(frozen=True)
class Elaborated:
    sig: Signature
    spans: dict  # declaration name -> span
    order: tuple[tuple[str, str], ...]  # (kind, name) in file order


def elaborate(src: SourceFile, base: Optional[Signature] = None) -> Elaborated:
    """Resolve names declaration by declaration; forward references are errors."""
    sig = base or Signature()
    spans: dict[str, Span] = {}
    order = []

    def fresh_global(name: str, span: Span) -> None:
        if sig.has_tycon(name) or sig.has_datacon(name) or sig.has_def(name):
            raise ScopeError(f"'{name}' is already declared", span)

    for d in src.decls:
        match d:
            case DataDecl(name, params, cons, span):
                fresh_global(name, span)
                ptel, psc = _elab_tel(params, _Scope(sig))
                sig = sig.add_tycon(name, ptel)
                psc = _Scope(sig, psc.locals)
                for c in cons:
                    fresh_global(c.name, c.span)
                    ftel, _ = _elab_tel(c.fields, psc)
                    sig = sig.add_datacon(c.name, name, ftel)
                    spans[c.name] = c.span
                spans[name] = span
                order.append(("data", name))
            case DefDecl(name, ty, body, span):
                fresh_global(name, span)
                ty_t = _elab(ty, _Scope(sig))
                # the body may mention the definition itself
                with_self = sig.add_def(name, ty_t, None)
                body_t = _elab(body, _Scope(with_self))
                sig = sig.add_def(name, ty_t, body_t)
                spans[name] = span
                order.append(("def", name))
    return Elaborated(sig, spans, tuple(order))


def elaborate_term(t: STerm, sig: Signature, names: Sequence[str] = ()) -> Term:
    """Resolve a surface term over local names (outermost first)."""
    return _elab(t, _Scope(sig, tuple(names)))


def elaborate_telescope(binders: Sequence[SBinder], sig: Signature, names: Sequence[str] = ()) -> Telescope:
    entries = []
    sc = _Scope(sig, tuple(names))
    for b in binders:
        entries.append((b.name, _elab(b.type, sc)))
        sc = sc.bind(b.name)
    return Telescope.of(*entries)


def load(text: str) -> Elaborated:
    return elaborate(parse(text))
