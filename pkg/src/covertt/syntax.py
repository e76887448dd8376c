"""Core syntax of CoverTT and its simultaneous-substitution calculus.

Variables are de Bruijn indices: ``Var(0)`` is the most recently bound
variable. Telescopes are snoc-ordered, so inside a telescope of length ``n``
the entry at position ``p`` is referenced as ``Var(n - 1 - p)`` from the end
of the telescope. Binder names are kept only as printing hints and never take
part in equality, so alpha-equivalent terms compare equal.

``Match`` is closed: its motive and branches only see their own telescopes,
so substitution and shifting only ever touch the scrutinees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence, Tuple, Union

Span = Tuple[int, int]


class ScopeError(Exception):
    """A term mentions a variable outside of the scope it was promised."""


@dataclass(frozen=True)
class Term:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)

    def __str__(self) -> str:
        from covertt.pretty import show

        return show(self)


@dataclass(frozen=True)
class Var(Term):
    index: int
    name: str = field(default="", compare=False)


@dataclass(frozen=True)
class Type(Term):
    pass


@dataclass(frozen=True)
class Pi(Term):
    name: str = field(compare=False)
    dom: Term
    cod: Term


@dataclass(frozen=True)
class Lam(Term):
    name: str = field(compare=False)
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Eq(Term):
    ty: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Refl(Term):
    arg: Term


@dataclass(frozen=True)
class TyCon(Term):
    name: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class DataCon(Term):
    """A data constructor applied to the owner's parameters followed by its fields."""

    name: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class Def(Term):
    """Reference to a top-level definition."""

    name: str


@dataclass(frozen=True)
class Binder:
    name: str = field(compare=False)
    type: Term


@dataclass(frozen=True)
class Telescope:
    entries: Tuple[Binder, ...] = ()

    @staticmethod
    def of(*pairs: Tuple[str, Term]) -> "Telescope":
        return Telescope(tuple(Binder(n, t) for n, t in pairs))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Binder]:
        return iter(self.entries)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Telescope(self.entries[i])
        return self.entries[i]

    def __add__(self, other: "Telescope") -> "Telescope":
        return Telescope(self.entries + other.entries)

    def extend(self, name: str, ty: Term) -> "Telescope":
        return Telescope(self.entries + (Binder(name, ty),))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(b.name for b in self.entries)

    @property
    def types(self) -> Tuple[Term, ...]:
        return tuple(b.type for b in self.entries)


EMPTY = Telescope()


@dataclass(frozen=True)
class Subst:
    """Terms for each entry of ``tel`` (the codomain), in telescope order.

    ``tel`` is recorded once the substitution has been checked; it plays no
    part in equality.
    """

    terms: Tuple[Term, ...] = ()
    tel: Optional[Telescope] = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]


SubstLike = Union[Subst, Sequence[Term]]


def _terms(s: SubstLike) -> Tuple[Term, ...]:
    return s.terms if isinstance(s, Subst) else tuple(s)


@dataclass(frozen=True)
class Branch:
    tel: Telescope
    pattern: Tuple[Term, ...]
    body: Term


@dataclass(frozen=True)
class Match(Term):
    scrut: Tuple[Term, ...]
    tel: Telescope
    motive: Term
    branches: Tuple[Branch, ...]


# -- signatures --------------------------------------------------------------


@dataclass(frozen=True)
class DataConInfo:
    owner: str
    fields: Telescope  # scoped over the owner's parameters


@dataclass(frozen=True)
class DefInfo:
    type: Term
    body: Optional[Term]


@dataclass(frozen=True)
class Signature:
    tycons: Tuple[Tuple[str, Telescope], ...] = ()
    datacons: Tuple[Tuple[str, DataConInfo], ...] = ()
    defs: Tuple[Tuple[str, DefInfo], ...] = ()

    def params(self, tycon: str) -> Telescope:
        for name, tel in self.tycons:
            if name == tycon:
                return tel
        raise KeyError(tycon)

    def constructors(self, tycon: str) -> Tuple[str, ...]:
        return tuple(n for n, info in self.datacons if info.owner == tycon)

    def datacon(self, name: str) -> DataConInfo:
        for n, info in self.datacons:
            if n == name:
                return info
        raise KeyError(name)

    def definition(self, name: str) -> DefInfo:
        for n, info in self.defs:
            if n == name:
                return info
        raise KeyError(name)

    def has_tycon(self, name: str) -> bool:
        return any(n == name for n, _ in self.tycons)

    def has_datacon(self, name: str) -> bool:
        return any(n == name for n, _ in self.datacons)

    def has_def(self, name: str) -> bool:
        return any(n == name for n, _ in self.defs)

    def add_tycon(self, name: str, params: Telescope) -> "Signature":
        return Signature(self.tycons + ((name, params),), self.datacons, self.defs)

    def add_datacon(self, name: str, owner: str, fields: Telescope) -> "Signature":
        return Signature(self.tycons, self.datacons + ((name, DataConInfo(owner, fields)),), self.defs)

    def add_def(self, name: str, ty: Term, body: Optional[Term]) -> "Signature":
        return Signature(self.tycons, self.datacons, self.defs + ((name, DefInfo(ty, body)),))

    def con_telescope(self, con: str) -> Telescope:
        """Parameters followed by fields: what ``DataCon(con, args)`` checks against."""
        info = self.datacon(con)
        return self.params(info.owner) + info.fields


# -- variable traversal ------------------------------------------------------


def map_vars(t: Term, f: Callable[[int, Var], Term], depth: int = 0) -> Term:
    """Rebuild ``t`` replacing each variable ``v`` under ``depth`` local binders by ``f(depth, v)``."""
    match t:
        case Var():
            return f(depth, t)
        case Type() | Def():
            return t
        case Pi(name, dom, cod):
            return Pi(name, map_vars(dom, f, depth), map_vars(cod, f, depth + 1), span=t.span)
        case Lam(name, body):
            return Lam(name, map_vars(body, f, depth + 1), span=t.span)
        case App(fn, arg):
            return App(map_vars(fn, f, depth), map_vars(arg, f, depth), span=t.span)
        case Eq(ty, lhs, rhs):
            return Eq(map_vars(ty, f, depth), map_vars(lhs, f, depth), map_vars(rhs, f, depth), span=t.span)
        case Refl(arg):
            return Refl(map_vars(arg, f, depth), span=t.span)
        case TyCon(name, args):
            return TyCon(name, tuple(map_vars(a, f, depth) for a in args), span=t.span)
        case DataCon(name, args):
            return DataCon(name, tuple(map_vars(a, f, depth) for a in args), span=t.span)
        case Match(scrut, tel, motive, branches):
            return Match(tuple(map_vars(s, f, depth) for s in scrut), tel, motive, branches, span=t.span)
    raise TypeError(f"not a term: {t!r}")


def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    if by == 0:
        return t

    def go(depth: int, v: Var) -> Term:
        if v.index < depth + cutoff:
            return v
        if v.index + by < 0:
            raise ScopeError(f"shifting {v.index} by {by} leaves scope")
        return Var(v.index + by, v.name, span=v.span)

    return map_vars(t, go)


def free_vars(t: Term) -> set[int]:
    """Free de Bruijn indices of ``t`` (relative to its own scope)."""
    out: set[int] = set()

    def go(depth: int, v: Var) -> Term:
        if v.index >= depth:
            out.add(v.index - depth)
        return v

    map_vars(t, go)
    return out


def instantiate(t: Term, args: SubstLike, depth: int = 0, strict: bool = False) -> Term:
    """Replace the last ``len(args)`` variables of ``t``'s scope by ``args``.

    ``args`` live in the scope that remains once those variables are removed.
    Variables bound further out are lowered accordingly; with ``strict`` they
    are an error instead. ``depth`` counts binders already entered.
    """
    terms = _terms(args)
    n = len(terms)
    if n == 0:
        return t

    def go(d: int, v: Var) -> Term:
        d += depth
        if v.index < d:
            return v
        j = v.index - d
        if j < n:
            return shift(terms[n - 1 - j], d)
        if strict:
            raise ScopeError(f"variable {v.name or v.index} escapes a substitution of arity {n}")
        return Var(v.index - n, v.name, span=v.span)

    return map_vars(t, go)


def apply_subst(t: Term, theta: SubstLike) -> Term:
    """``[theta/Delta] t`` for ``t`` scoped over Delta (possibly under local binders)."""
    if isinstance(theta, Subst) and theta.tel is not None and len(theta.tel) != len(theta.terms):
        raise ScopeError("substitution arity does not match its telescope")
    return instantiate(t, theta, strict=True)


def id_subst(tel: Telescope) -> Subst:
    n = len(tel)
    return Subst(tuple(Var(n - 1 - p, b.name) for p, b in enumerate(tel)), tel)


def compose_subst(theta: SubstLike, sigma: SubstLike) -> Subst:
    """``theta . sigma``: substitute ``sigma`` into every term of ``theta``."""
    tel = theta.tel if isinstance(theta, Subst) else None
    return Subst(tuple(apply_subst(t, sigma) for t in _terms(theta)), tel)


def weaken(t: Term, by: Union[int, Telescope]) -> Term:
    return shift(t, by if isinstance(by, int) else len(by))


def extend_subst(theta: SubstLike, t: Term, ty: Optional[Term] = None, name: str = "_") -> Subst:
    tel = theta.tel if isinstance(theta, Subst) else None
    if tel is not None and ty is not None:
        tel = tel.extend(name, ty)
    else:
        tel = None
    return Subst(_terms(theta) + (t,), tel)


def drop_last(theta: Subst) -> Subst:
    tel = theta.tel[:-1] if theta.tel is not None else None
    return Subst(theta.terms[:-1], tel)


def subst_tel(tel: Telescope, args: SubstLike) -> Telescope:
    """Instantiate the variables ``tel`` is scoped over (the last ``len(args)`` of them)."""
    return Telescope(tuple(Binder(b.name, instantiate(b.type, args, depth=k)) for k, b in enumerate(tel)))


def shift_tel(tel: Telescope, by: int) -> Telescope:
    return Telescope(tuple(Binder(b.name, shift(b.type, by, cutoff=k)) for k, b in enumerate(tel)))


def strengthen(t: Term, by: int) -> Term:
    """Drop the ``by`` innermost variables of ``t``'s scope; they must not occur."""
    if by == 0:
        return t
    if any(i < by for i in free_vars(t)):
        raise ScopeError("term depends on a variable being dropped")
    return shift(t, -by)


def is_well_scoped(t: Term, size: int) -> bool:
    return all(i < size for i in free_vars(t))


def var_at(tel_len: int, pos: int, name: str = "") -> Var:
    return Var(tel_len - 1 - pos, name)


def pos_of(tel_len: int, index: int) -> int:
    return tel_len - 1 - index


# -- telescope surgery -------------------------------------------------------


def replace_prefix(tel: Telescope, p: int, new_prefix: Telescope, sigma: Sequence[Term]) -> Tuple[Telescope, Subst]:
    """Replace ``tel[:p+1]`` by ``new_prefix``.

    ``sigma`` gives, over ``new_prefix``, a term for each of the ``p + 1``
    replaced entries. Returns the new telescope and the substitution from it
    back into ``tel``.
    """
    assert len(sigma) == p + 1
    after = tel.entries[p + 1:]
    new_after = tuple(Binder(b.name, instantiate(b.type, sigma, depth=j, strict=True)) for j, b in enumerate(after))
    k = len(after)
    rho = [shift(s, k) for s in sigma] + [Var(k - 1 - j, b.name) for j, b in enumerate(after)]
    new_tel = Telescope(new_prefix.entries + new_after)
    return new_tel, Subst(tuple(rho), tel)


def solve_var(tel: Telescope, p: int, u: Term) -> Optional[Tuple[Telescope, Subst]]:
    """Eliminate the entry at position ``p`` by setting it to ``u``.

    ``u`` is scoped over the whole of ``tel`` and must not mention position
    ``p``. The remaining entries are reordered (stably) so that each comes
    after everything it now depends on. Returns ``None`` when no such order
    exists.
    """
    n = len(tel)
    u_pos = {pos_of(n, i) for i in free_vars(u)}
    assert p not in u_pos
    deps: dict[int, set[int]] = {}
    for r in range(n):
        if r == p:
            continue
        ds = {pos_of(r, i) for i in free_vars(tel[r].type)}
        if p in ds:
            ds = (ds - {p}) | u_pos
        deps[r] = ds
    order: list[int] = []
    placed: set[int] = set()
    remaining = sorted(deps)
    while remaining:
        for r in remaining:
            if deps[r] <= placed:
                break
        else:
            return None
        remaining.remove(r)
        order.append(r)
        placed.add(r)
    m = len(order)
    newpos = {r: k for k, r in enumerate(order)}
    rho: list[Optional[Term]] = [None] * n
    for r in order:
        rho[r] = Var(m - 1 - newpos[r], tel[r].name)
    placeholder = list(rho)
    placeholder[p] = Type()  # never consulted: u does not mention p
    rho[p] = apply_subst(u, placeholder)
    entries = []
    for r in order:
        full = apply_subst(tel[r].type, rho[:r])
        entries.append(Binder(tel[r].name, strengthen(full, m - newpos[r])))
    return Telescope(tuple(entries)), Subst(tuple(rho), tel)


def iter_subterms(t: Term) -> Iterable[Term]:
    """Pre-order walk, including inside closed match telescopes and branches."""
    yield t
    match t:
        case Pi(_, dom, cod):
            yield from iter_subterms(dom)
            yield from iter_subterms(cod)
        case Lam(_, body):
            yield from iter_subterms(body)
        case App(fn, arg):
            yield from iter_subterms(fn)
            yield from iter_subterms(arg)
        case Eq(ty, lhs, rhs):
            for s in (ty, lhs, rhs):
                yield from iter_subterms(s)
        case Refl(arg):
            yield from iter_subterms(arg)
        case TyCon(_, args) | DataCon(_, args):
            for a in args:
                yield from iter_subterms(a)
        case Match(scrut, tel, motive, branches):
            for s in scrut:
                yield from iter_subterms(s)
            for b in tel:
                yield from iter_subterms(b.type)
            yield from iter_subterms(motive)
            for br in branches:
                for b in br.tel:
                    yield from iter_subterms(b.type)
                for s in br.pattern:
                    yield from iter_subterms(s)
                yield from iter_subterms(br.body)


def mentions_def(t: Term, name: str) -> bool:
    return any(isinstance(s, Def) and s.name == name for s in iter_subterms(t))


def mentions_tycon(t: Term, name: str) -> bool:
    return any(isinstance(s, TyCon) and s.name == name for s in iter_subterms(t))


def term_size(t: Term) -> int:
    return sum(1 for _ in iter_subterms(t))
