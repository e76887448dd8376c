"""Coverage checking by clause-directed case splitting.

A cover is elaborated into a tree. Each internal node is one of the cover
building steps:

* ``SplitCon``: replace a variable of a datatype by one constructor per child
  (coproduct cover, composed into the parent);
* ``SplitRefl``: contract an equality-typed variable to ``refl`` along the
  most general unifier of its endpoints;
* ``Absurd``: a node whose context is empty, either through a variable of a
  datatype without constructors or an equation whose endpoints clash.

Leaves are identity covers matched by exactly one clause.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

from covertt import unification as un
from covertt.conversion import Fuel, conv, whnf
from covertt.syntax import (
    Binder,
    DataCon,
    Eq,
    Refl,
    Signature,
    Subst,
    Telescope,
    Term,
    TyCon,
    Var,
    apply_subst,
    free_vars,
    pos_of,
    replace_prefix,
    shift,
    subst_tel,
    term_size,
)

Clause = Tuple[Telescope, Sequence[Term]]

RULE_TAGS = {
    "Leaf": "id-cover",
    "SplitCon": "coproduct-cover",
    "SplitRefl": "refl-cover",
    "Absurd": "absurd-cover",
}


# -- trees -------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    clause: int
    renaming: Subst  # terms over ``tel`` for each variable of the clause
    tel: Telescope
    pattern: Tuple[Term, ...]


@dataclass(frozen=True)
class SplitCon:
    var: int
    name: str
    tycon: str
    tel: Telescope
    children: Tuple[Tuple[str, "CoverTree"], ...]


@dataclass(frozen=True)
class SplitRefl:
    var: int
    name: str
    equation: Term  # the Eq type, over ``tel[:var]``
    tel: Telescope
    solved: Telescope  # what ``tel[:var]`` shrinks to
    mgu: Subst  # from ``solved`` into ``tel[:var]``
    child: "CoverTree"


@dataclass(frozen=True)
class Absurd:
    var: int
    name: str
    reason: str
    tel: Telescope


CoverTree = Union[Leaf, SplitCon, SplitRefl, Absurd]


# -- errors ------------------------------------------------------------------


@dataclass(frozen=True)
class MissingCase:
    tel: Telescope
    pattern: Tuple[Term, ...]


@dataclass(frozen=True)
class Unreachable:
    clause: int


@dataclass(frozen=True)
class Overlap:
    clause_a: int
    clause_b: int
    tel: Telescope
    pattern: Tuple[Term, ...]


@dataclass(frozen=True)
class Undecidable:
    reason: str


CoverError = Union[MissingCase, Unreachable, Overlap, Undecidable]


class CoverageError(Exception):
    def __init__(self, error: CoverError):
        super().__init__(describe_error(error))
        self.error = error

    @property
    def kind(self) -> str:
        return type(self.error).__name__


def describe_error(err: CoverError) -> str:
    from covertt.pretty import show_pattern

    match err:
        case MissingCase(tel, pattern):
            return f"missing case {show_pattern(tel, pattern)}"
        case Unreachable(i):
            return f"clause {i} is unreachable"
        case Overlap(a, b, tel, pattern):
            return f"clauses {a} and {b} overlap on {show_pattern(tel, pattern)}"
        case Undecidable(reason):
            return f"cannot decide coverage: {reason}"
    return repr(err)


# -- states ------------------------------------------------------------------


@dataclass(frozen=True)
class State:
    tel: Telescope
    pattern: Tuple[Term, ...]  # one term over ``tel`` per scrutinee entry

    def apply(self, new_tel: Telescope, rho: Subst) -> "State":
        return State(new_tel, tuple(apply_subst(p, rho) for p in self.pattern))


def _type_at(tel: Telescope, p: int) -> Term:
    return tel[p].type


def split_variable(sig: Signature, state: State, p: int, fuel: Optional[Fuel] = None):
    """One child state per constructor, or an ``Absurd`` when there are none.

    Returns ``(tycon, [(con, state, first_field_pos, n_fields), ...])``.
    """
    fuel = fuel or Fuel()
    tel = state.tel
    ty = whnf(sig, _type_at(tel, p), fuel)
    if not isinstance(ty, TyCon):
        raise CoverageError(Undecidable(f"cannot split {tel[p].name or p}: its type is not a datatype"))
    cons = sig.constructors(ty.name)
    if not cons:
        return ty.name, Absurd(p, tel[p].name, f"{ty.name} has no constructors", tel)
    children = []
    prefix = tel[:p]
    for c in cons:
        fields = subst_tel(sig.datacon(c).fields, ty.args)
        k = len(fields)
        params = tuple(shift(a, k) for a in ty.args)
        con = DataCon(c, params + tuple(Var(k - 1 - j, fields[j].name) for j in range(k)))
        sigma = [shift(v, k) for v in _id_terms(prefix)] + [con]
        new_tel, rho = replace_prefix(tel, p, prefix + fields, sigma)
        children.append((c, state.apply(new_tel, rho), p, k))
    return ty.name, children


def _id_terms(tel: Telescope) -> list[Term]:
    n = len(tel)
    return [Var(n - 1 - q, b.name) for q, b in enumerate(tel)]


def split_refl(sig: Signature, state: State, p: int, fuel: Optional[Fuel] = None):
    """Contract the equation at ``p``.

    Returns ``(new_state, unifier, shrink)`` on success, an ``Absurd`` on a clash;
    stuck unification raises ``Undecidable``. ``shrink`` is how many positions
    the entries after ``p`` move left.
    """
    fuel = fuel or Fuel()
    tel = state.tel
    ty = whnf(sig, _type_at(tel, p), fuel)
    if not isinstance(ty, Eq):
        raise CoverageError(Undecidable(f"{tel[p].name or p} is not an equation"))
    prefix = tel[:p]
    out = un.unify(sig, prefix, ty.ty, ty.lhs, ty.rhs, fuel)
    match out:
        case un.Clash(_, lhs, rhs):
            return Absurd(p, tel[p].name, f"{lhs} and {rhs} clash", tel)
        case un.Stuck(reason):
            raise CoverageError(Undecidable(reason))
    sigma = list(out.mgu.terms) + [Refl(apply_subst(ty.lhs, out.mgu))]
    new_tel, rho = replace_prefix(tel, p, out.tel, sigma)
    return state.apply(new_tel, rho), out, (p + 1) - len(out.tel)


# -- clause matching ---------------------------------------------------------


@dataclass(frozen=True)
class _Matched:
    renaming: Subst


@dataclass(frozen=True)
class _NoMatch:
    pass


@dataclass(frozen=True)
class _Blocked:
    vars: Tuple[Tuple[int, str], ...]  # (leaf de Bruijn index, "con" | "refl")


@dataclass(frozen=True)
class _Unsure:
    reason: str


class _Clash(Exception):
    pass


def _rigid_clash(sig, a: Term, b: Term, fuel) -> bool:
    a = whnf(sig, a, fuel)
    b = whnf(sig, b, fuel)
    match a, b:
        case DataCon(c1, x1), DataCon(c2, x2):
            return c1 != c2 or any(_rigid_clash(sig, u, v, fuel) for u, v in zip(x1, x2))
        case TyCon(c1, x1), TyCon(c2, x2):
            return c1 != c2 or any(_rigid_clash(sig, u, v, fuel) for u, v in zip(x1, x2))
    return False


def match_clause(sig: Signature, clause: Clause, state: State, fuel: Optional[Fuel] = None):
    """Compare a clause against a node: matched, incompatible, blocked on leaf variables, or unsure."""
    fuel = fuel or Fuel()
    ctel, cpat = clause
    m = len(ctel)
    sol: list[Optional[Term]] = [None] * m
    forced: list[tuple[Term, Term]] = []
    blocks: list[tuple[int, str]] = []

    def bind(p: Var, q: Term) -> None:
        k = m - 1 - p.index
        if sol[k] is None:
            sol[k] = q
        else:
            forced.append((p, q))

    def go(p: Term, q: Term, inert: bool) -> None:
        if isinstance(p, Var) and 0 <= p.index < m:
            bind(p, q)
            return
        if inert:
            forced.append((p, q))
            return
        match p:
            case DataCon(name, args):
                w = whnf(sig, q, fuel)
                match w:
                    case DataCon(wn, wargs):
                        if wn != name:
                            raise _Clash
                        npar = len(sig.params(sig.datacon(name).owner))
                        for i, (a, b) in enumerate(zip(args, wargs)):
                            go(a, b, i < npar)
                    case Var(i):
                        blocks.append((i, "con"))
                    case _:
                        forced.append((p, w))
            case Refl(arg):
                w = whnf(sig, q, fuel)
                match w:
                    case Refl(warg):
                        go(arg, warg, True)
                    case Var(i):
                        blocks.append((i, "refl"))
                    case _:
                        forced.append((p, w))
            case _:
                forced.append((p, q))

    try:
        for p, q in zip(cpat, state.pattern):
            go(p, q, False)
    except _Clash:
        return _NoMatch()
    if blocks:
        return _Blocked(tuple(dict.fromkeys(blocks)))
    if any(s is None for s in sol):
        missing = [ctel[k].name for k, s in enumerate(sol) if s is None]
        return _Unsure(f"clause variables {', '.join(missing)} are only used at forced positions")
    renaming = Subst(tuple(sol), ctel)
    for p, q in forced:
        lhs = apply_subst(p, renaming)
        if conv(sig, state.tel, lhs, q, fuel):
            continue
        if _rigid_clash(sig, lhs, q, fuel):
            return _NoMatch()
        return _Unsure("a forced position is not determined by the splits so far")
    return _Matched(renaming)


# -- the checker -------------------------------------------------------------


def _index_positions(tel: Telescope) -> set[int]:
    """Positions referenced by the type of some later entry."""
    out: set[int] = set()
    for r, b in enumerate(tel):
        out |= {pos_of(r, i) for i in free_vars(b.type)}
    return out


def select_split(state: State, blocked: Sequence[_Blocked]) -> Optional[tuple[int, str]]:
    """Pick the position to split next.

    Candidates are the leaf variables some compatible clause is rigid on.
    Variables that no later type depends on come first, then variables every
    blocked clause agrees on, then the leftmost.
    """
    n = len(state.tel)
    cands: dict[int, str] = {}
    votes: dict[int, int] = {}
    for b in blocked:
        seen = set()
        for idx, kind in b.vars:
            p = pos_of(n, idx)
            cands.setdefault(p, kind)
            if p not in seen:
                votes[p] = votes.get(p, 0) + 1
                seen.add(p)
    if not cands:
        return None
    indices = _index_positions(state.tel)
    best = min(cands, key=lambda p: (p in indices, -votes[p], p))
    return best, cands[best]


@dataclass
class _Checker:
    sig: Signature
    clauses: Sequence[Clause]
    fuel: Fuel
    max_depth: int
    used: set = field(default_factory=set)

    def run(self, state: State, depth: int) -> CoverTree:
        if depth > self.max_depth:
            raise CoverageError(Undecidable("split depth bound exceeded"))
        results = [match_clause(self.sig, c, state, self.fuel) for c in self.clauses]
        blocked = [r for r in results if isinstance(r, _Blocked)]
        if blocked:
            pick = select_split(state, blocked)
            p, kind = pick
            return self._split(state, p, kind, depth)
        matched = [(i, r) for i, r in enumerate(results) if isinstance(r, _Matched)]
        unsure = [r for r in results if isinstance(r, _Unsure)]
        if unsure:
            raise CoverageError(Undecidable(unsure[0].reason))
        if len(matched) > 1:
            raise CoverageError(Overlap(matched[0][0], matched[1][0], state.tel, state.pattern))
        if matched:
            i, r = matched[0]
            self.used.add(i)
            return Leaf(i, r.renaming, state.tel, state.pattern)
        absurd = self._find_absurd(state)
        if absurd is not None:
            return absurd
        raise CoverageError(MissingCase(state.tel, state.pattern))

    def _split(self, state: State, p: int, kind: str, depth: int) -> CoverTree:
        if kind == "refl":
            return self._refl(state, p, depth)
        tycon, children = split_variable(self.sig, state, p, self.fuel)
        if isinstance(children, Absurd):
            return children
        out = []
        for con, child, first, k in children:
            out.append((con, self._after_con(child, first, k, depth)))
        return SplitCon(p, state.tel[p].name, tycon, state.tel, tuple(out))

    def _after_con(self, state: State, first: int, k: int, depth: int) -> CoverTree:
        """Contract the constructor's equality fields left to right, then carry on."""
        pending = [first + j for j in range(k) if isinstance(whnf(self.sig, state.tel[first + j].type, self.fuel), Eq)]
        return self._eager(state, pending, depth)

    def _eager(self, state: State, pending: list[int], depth: int) -> CoverTree:
        if not pending:
            return self.run(state, depth + 1)
        p, rest = pending[0], pending[1:]
        try:
            res = split_refl(self.sig, state, p, self.fuel)
        except CoverageError:
            # left for the clauses to demand
            return self._eager(state, rest, depth)
        if isinstance(res, Absurd):
            return res
        child, out, shrink = res
        sub = self._eager(child, [q - shrink for q in rest], depth)
        return SplitRefl(p, state.tel[p].name, state.tel[p].type, state.tel, out.tel, out.mgu, sub)

    def _refl(self, state: State, p: int, depth: int) -> CoverTree:
        res = split_refl(self.sig, state, p, self.fuel)
        if isinstance(res, Absurd):
            return res
        child, out, _ = res
        return SplitRefl(p, state.tel[p].name, state.tel[p].type, state.tel, out.tel, out.mgu, self.run(child, depth + 1))

    def _find_absurd(self, state: State) -> Optional[Absurd]:
        for p, b in enumerate(state.tel):
            ty = whnf(self.sig, b.type, self.fuel)
            if isinstance(ty, TyCon) and self.sig.has_tycon(ty.name) and not self.sig.constructors(ty.name):
                return Absurd(p, b.name, f"{ty.name} has no constructors", state.tel)
            if isinstance(ty, Eq):
                out = un.unify(self.sig, state.tel[:p], ty.ty, ty.lhs, ty.rhs, self.fuel)
                if isinstance(out, un.Clash):
                    return Absurd(p, b.name, f"{out.lhs_head} and {out.rhs_head} clash", state.tel)
        return None


def check_cover(sig: Signature, tel: Telescope, clauses: Sequence[Clause], fuel: Optional[Fuel] = None) -> CoverTree:
    """Build a cover tree for ``tel`` from the clauses or raise :class:`CoverageError`."""
    fuel = fuel or Fuel()
    clauses = [(ct, tuple(cp)) for ct, cp in clauses]
    bound = max((sum(term_size(p) for p in cp) for _, cp in clauses), default=0) + 2 * len(tel) + 4
    root = State(tel, tuple(Var(len(tel) - 1 - p, b.name) for p, b in enumerate(tel)))
    checker = _Checker(sig, clauses, fuel, bound)
    tree = checker.run(root, 0)
    for i in range(len(clauses)):
        if i not in checker.used:
            raise CoverageError(Unreachable(i))
    return tree


def leaves(tree: CoverTree) -> list[tuple[Telescope, Tuple[Term, ...]]]:
    match tree:
        case Leaf(_, _, tel, pattern):
            return [(tel, pattern)]
        case SplitCon(children=children):
            return [lf for _, c in children for lf in leaves(c)]
        case SplitRefl(child=child):
            return leaves(child)
    return []


def absurd_nodes(tree: CoverTree) -> list[Absurd]:
    match tree:
        case Absurd():
            return [tree]
        case SplitCon(children=children):
            return [a for _, c in children for a in absurd_nodes(c)]
        case SplitRefl(child=child):
            return absurd_nodes(child)
    return []


def count_nodes(tree: CoverTree, kind: type) -> int:
    here = 1 if isinstance(tree, kind) else 0
    match tree:
        case SplitCon(children=children):
            return here + sum(count_nodes(c, kind) for _, c in children)
        case SplitRefl(child=child):
            return here + count_nodes(child, kind)
    return here


# -- rendering ---------------------------------------------------------------


def to_json(tree: CoverTree, sig: Optional[Signature] = None) -> dict:
    from covertt.pretty import show, show_pattern

    match tree:
        case Leaf(clause, _, tel, pattern):
            return {"rule": "Leaf", "tag": RULE_TAGS["Leaf"], "clause": clause, "pattern": show_pattern(tel, pattern, sig)}
        case SplitCon(var, name, tycon, tel, children):
            return {
                "rule": "SplitCon",
                "tag": RULE_TAGS["SplitCon"],
                "var": name,
                "position": var,
                "type": show(tel[var].type, tel.names[:var], sig),
                "children": [dict(con=c, **to_json(t, sig)) for c, t in children],
            }
        case SplitRefl(var, name, eq, tel, solved, mgu, child):
            return {
                "rule": "SplitRefl",
                "tag": RULE_TAGS["SplitRefl"],
                "var": name,
                "position": var,
                "equation": show(eq, tel.names[:var], sig),
                "solution": _describe_mgu(tel[:var], solved, mgu, sig),
                "children": [to_json(child, sig)],
            }
        case Absurd(var, name, reason, tel):
            return {
                "rule": "Absurd",
                "tag": RULE_TAGS["Absurd"],
                "var": name,
                "position": var,
                "type": show(tel[var].type, tel.names[:var], sig),
                "reason": reason,
            }
    raise TypeError(tree)


def _describe_mgu(tel: Telescope, solved: Telescope, mgu: Subst, sig) -> list[str]:
    """The variables of ``tel`` the unifier eliminated, as ``x := t``."""
    from covertt.pretty import show

    out = []
    k = len(solved)
    for p, t in enumerate(mgu.terms):
        if isinstance(t, Var) and solved.names[k - 1 - t.index] == tel[p].name:
            continue
        out.append(f"{tel[p].name} := {show(t, solved.names, sig)}")
    return out


def render(tree: CoverTree, sig: Optional[Signature] = None, indent: int = 0) -> str:
    from covertt.pretty import show, show_pattern

    pad = "  " * indent
    match tree:
        case Leaf(clause, _, tel, pattern):
            return f"{pad}Leaf clause {clause}: {show_pattern(tel, pattern, sig)}  [{RULE_TAGS['Leaf']}]"
        case SplitCon(var, name, tycon, tel, children):
            lines = [f"{pad}SplitCon {name} : {show(tel[var].type, tel.names[:var], sig)}  [{RULE_TAGS['SplitCon']}]"]
            for c, t in children:
                lines.append(f"{pad}  {c}:")
                lines.append(render(t, sig, indent + 2))
            return "\n".join(lines)
        case SplitRefl(var, name, eq, tel, solved, mgu, child):
            sol = ", ".join(_describe_mgu(tel[:var], solved, mgu, sig)) or "no variables solved"
            head = f"{pad}SplitRefl {name} : {show(eq, tel.names[:var], sig)}  ({sol})  [{RULE_TAGS['SplitRefl']}]"
            return head + "\n" + render(child, sig, indent + 1)
        case Absurd(var, name, reason, tel):
            return f"{pad}Absurd {name} : {show(tel[var].type, tel.names[:var], sig)}  ({reason})  [{RULE_TAGS['Absurd']}]"
    raise TypeError(tree)
