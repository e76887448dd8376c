"""A finite set model used as an independent oracle.

Types denote finite sets of values, enumerated up to a constructor-nesting
bound. Equality is extensional: ``Eq(T, s, t)`` has one element when ``s``
and ``t`` denote the same value and none otherwise. Datatypes are tagged
unions of their constructors' field tuples. A match denotes the function that
sends a scrutinee tuple to the body of the branch whose pattern image
contains it, evaluated at the (semantic) preimage.

Nothing here calls the kernel's reduction or coverage code; the two are
compared against each other in the tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple, Union

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


class OracleError(Exception):
    pass


class FunctionSpaceTooLarge(OracleError):
    pass


class BoundExceeded(OracleError):
    pass


class NoSemanticBranch(OracleError):
    pass


class ConflictingBranches(OracleError):
    pass


# -- values ------------------------------------------------------------------


@dataclass(frozen=True)
class VCon:
    name: str
    fields: Tuple["Value", ...] = ()


@dataclass(frozen=True)
class VRefl:
    of: "Value"


@dataclass(frozen=True)
class VFun:
    """A function given by its graph over an enumerated domain."""

    dom: "Code"
    graph: Tuple[Tuple["Value", "Value"], ...]


@dataclass(frozen=True)
class VClosure:
    env: Tuple["Value", ...]
    body: Term


# type codes are values too (elements of the universe)


@dataclass(frozen=True)
class CTyCon:
    name: str
    params: Tuple["Value", ...] = ()


@dataclass(frozen=True)
class CPi:
    dom: "Code"
    env: Tuple["Value", ...]
    cod: Term


@dataclass(frozen=True)
class CEq:
    ty: "Code"
    lhs: "Value"
    rhs: "Value"


@dataclass(frozen=True)
class CUniv:
    pass


Code = Union[CTyCon, CPi, CEq, CUniv]
Value = Union[VCon, VRefl, VFun, VClosure, CTyCon, CPi, CEq, CUniv]

PALETTE = ("Bool", "Unit", "Empty")

_STANDARD = {
    "Bool": ("true", "false"),
    "Unit": ("tt",),
    "Empty": (),
}


@dataclass(frozen=True)
class Bound:
    max_depth: int = 3
    max_fun: int = 64
    max_graphs: int = 4096
    max_steps: int = 200_000

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


def with_palette(sig: Signature) -> Signature:
    """Add Bool, Unit and Empty when the signature lacks them."""
    for name, cons in _STANDARD.items():
        if sig.has_tycon(name):
            continue
        sig = sig.add_tycon(name, Telescope())
        for c in cons:
            if not sig.has_datacon(c):
                sig = sig.add_datacon(c, name, Telescope())
    return sig


class SetModel:
    def __init__(self, sig: Signature, bound: Bound = Bound()):
        self.sig = with_palette(sig)
        self.bound = bound
        self.steps = 0
        self._defs: dict[str, Value] = {}
        self._enum_cache: dict[tuple, tuple] = {}

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.bound.max_steps:
            raise BoundExceeded("evaluation step bound exceeded")

    # -- evaluation

    def eval(self, env: Sequence[Value], t: Term) -> Value:
        self._tick()
        env = tuple(env)
        match t:
            case Var(i):
                if i >= len(env):
                    raise OracleError(f"variable {i} outside an environment of size {len(env)}")
                return env[len(env) - 1 - i]
            case Type():
                return CUniv()
            case Pi(_, dom, cod):
                return CPi(self.eval(env, dom), env, cod)
            case Lam(_, body):
                return VClosure(env, body)
            case App(fn, arg):
                return self.apply(self.eval(env, fn), self.eval(env, arg))
            case Eq(ty, lhs, rhs):
                return CEq(self.eval(env, ty), self.eval(env, lhs), self.eval(env, rhs))
            case Refl(arg):
                return VRefl(self.eval(env, arg))
            case TyCon(name, args):
                return CTyCon(name, tuple(self.eval(env, a) for a in args))
            case DataCon(name, args):
                npar = len(self.sig.params(self.sig.datacon(name).owner))
                return VCon(name, tuple(self.eval(env, a) for a in args[npar:]))
            case Def(name):
                if name not in self._defs:
                    body = self.sig.definition(name).body
                    if body is None:
                        raise OracleError(f"{name} has no body")
                    self._defs[name] = self.eval((), body)
                return self._defs[name]
            case Match(scrut, tel, motive, branches):
                vals = tuple(self.eval(env, s) for s in scrut)
                j, sigma = self.select(tel, branches, vals)
                return self.eval(sigma, branches[j].body)
        raise TypeError(f"not a term: {t!r}")

    def apply(self, f: Value, a: Value) -> Value:
        match f:
            case VClosure(env, body):
                return self.eval(env + (a,), body)
            case VFun(dom, graph):
                for d, v in graph:
                    if self.equal(dom, d, a):
                        return v
                raise BoundExceeded("argument outside the enumerated domain")
        raise OracleError(f"applying a non-function {f!r}")

    def cod(self, code: CPi, a: Value) -> Code:
        return self.eval(code.env + (a,), code.cod)

    # -- equality and membership

    def equal(self, code: Code, a: Value, b: Value) -> bool:
        if a == b:
            return True
        match code:
            case CPi():
                return all(self.equal(self.cod(code, d), self.apply(a, d), self.apply(b, d)) for d in self.enum(code.dom))
            case CEq():
                return isinstance(a, VRefl) and isinstance(b, VRefl)
            case CTyCon(name, params):
                if not (isinstance(a, VCon) and isinstance(b, VCon)) or a.name != b.name:
                    return False
                codes = self.field_codes(params, a.name, a.fields)
                return all(self.equal(c, x, y) for c, x, y in zip(codes, a.fields, b.fields))
        return False

    def field_codes(self, params: Tuple[Value, ...], con: str, fields: Tuple[Value, ...]) -> list[Code]:
        tel = self.sig.datacon(con).fields
        env = params
        out = []
        for b, v in zip(tel, fields):
            out.append(self.eval(env, b.type))
            env = env + (v,)
        return out

    def inhabits(self, code: Code, v: Value) -> bool:
        match code:
            case CUniv():
                return isinstance(v, (CTyCon, CPi, CEq, CUniv))
            case CEq(ty, lhs, rhs):
                return isinstance(v, VRefl) and self.equal(ty, lhs, rhs)
            case CPi():
                return isinstance(v, (VFun, VClosure))
            case CTyCon(name, params):
                if not isinstance(v, VCon) or not self.sig.has_datacon(v.name):
                    return False
                info = self.sig.datacon(v.name)
                if info.owner != name or len(v.fields) != len(info.fields):
                    return False
                env = params
                for b, x in zip(info.fields, v.fields):
                    if not self.inhabits(self.eval(env, b.type), x):
                        return False
                    env = env + (x,)
                return True
        return False

    # -- enumeration

    def enum(self, code: Code, depth: Optional[int] = None) -> tuple:
        depth = self.bound.max_depth if depth is None else depth
        key = (code, depth)
        hit = self._enum_cache.get(key)
        if hit is not None:
            return hit
        out = tuple(self._enum(code, depth))
        self._enum_cache[key] = out
        return out

    def _enum(self, code: Code, depth: int) -> Iterator[Value]:
        match code:
            case CUniv():
                for name in PALETTE:
                    yield CTyCon(name, ())
            case CEq(ty, lhs, rhs):
                if self.equal(ty, lhs, rhs):
                    yield VRefl(lhs)
            case CTyCon(name, params):
                if depth <= 0:
                    return
                for c in self.sig.constructors(name):
                    for fields in self._enum_tel(self.sig.datacon(c).fields, params, depth - 1):
                        yield VCon(c, fields)
            case CPi(dom, _, _):
                yield from self._enum_fun(code, depth)
            case _:
                raise OracleError(f"cannot enumerate {code!r}")

    def _enum_fun(self, code: CPi, depth: int) -> Iterator[Value]:
        dom = self.enum(code.dom, depth)
        cods = [self.enum(self.cod(code, d), depth) for d in dom]
        widest = max((len(c) for c in cods), default=1)
        if len(dom) * widest > self.bound.max_fun:
            raise FunctionSpaceTooLarge(f"{len(dom)} x {widest} exceeds {self.bound.max_fun}")
        count = 1
        for c in cods:
            count *= len(c)
        if count > self.bound.max_graphs:
            raise FunctionSpaceTooLarge(f"{count} functions exceed {self.bound.max_graphs}")
        for outs in itertools.product(*cods):
            yield VFun(code.dom, tuple(zip(dom, outs)))

    def _enum_tel(self, tel: Telescope, base: Tuple[Value, ...], depth: int) -> Iterator[Tuple[Value, ...]]:
        def go(k: int, env: Tuple[Value, ...]) -> Iterator[Tuple[Value, ...]]:
            if k == len(tel):
                yield env[len(base):]
                return
            code = self.eval(env, tel[k].type)
            for v in self.enum(code, depth):
                yield from go(k + 1, env + (v,))

        return go(0, base)

    def enum_telescope(self, tel: Telescope, depth: Optional[int] = None) -> list[Tuple[Value, ...]]:
        depth = self.bound.max_depth if depth is None else depth
        return list(self._enum_tel(tel, (), depth))

    # -- semantic pattern matching

    def select(self, tel: Telescope, branches: Sequence[Branch], vals: Tuple[Value, ...]) -> tuple[int, Tuple[Value, ...]]:
        """The branch whose pattern image contains ``vals`` and the preimage."""
        xi_codes = self.tel_codes(tel, vals)
        for j, br in enumerate(branches):
            sigma = self.factor(br.tel, br.pattern, xi_codes, vals)
            if sigma is not None:
                return j, sigma
        raise NoSemanticBranch("no branch pattern covers the scrutinee")

    def tel_codes(self, tel: Telescope, vals: Sequence[Value]) -> list[Code]:
        env: Tuple[Value, ...] = ()
        out = []
        for b, v in zip(tel, vals):
            out.append(self.eval(env, b.type))
            env = env + (v,)
        return out

    def factor(self, delta: Telescope, pattern: Sequence[Term], codes: Sequence[Code], vals: Sequence[Value]) -> Optional[Tuple[Value, ...]]:
        """Some environment of ``delta`` sending ``pattern`` to ``vals``, if any."""
        m = len(delta)
        guess: list[Optional[Value]] = [None] * m

        def decompose(p: Term, v: Value) -> None:
            match p:
                case Var(i) if i < m:
                    if guess[m - 1 - i] is None:
                        guess[m - 1 - i] = v
                case DataCon(name, args) if isinstance(v, VCon) and v.name == name:
                    npar = len(self.sig.params(self.sig.datacon(name).owner))
                    for a, x in zip(args[npar:], v.fields):
                        decompose(a, x)

        for p, v in zip(pattern, vals):
            decompose(p, v)

        def candidates(k: int, env: Tuple[Value, ...]) -> Iterator[Tuple[Value, ...]]:
            if k == m:
                yield env
                return
            code = self.eval(env, delta[k].type)
            if guess[k] is not None:
                if self.inhabits(code, guess[k]):
                    yield from candidates(k + 1, env + (guess[k],))
                return
            for v in self.enum(code):
                yield from candidates(k + 1, env + (v,))

        for env in candidates(0, ()):
            image = [self.eval(env, p) for p in pattern]
            if all(self.equal(c, x, y) for c, x, y in zip(codes, image, vals)):
                return env
        return None

    # -- covers

    def image(self, env: Sequence[Value], pattern: Sequence[Term]) -> Tuple[Value, ...]:
        return tuple(self.eval(env, p) for p in pattern)


@dataclass(frozen=True)
class CoverReport:
    covering: bool
    disjoint: bool
    environments: int
    uncovered: Tuple[Tuple[Value, ...], ...]
    overlapping: Tuple[Tuple[Value, ...], ...]

    @property
    def counterexamples(self) -> Tuple[Tuple[Value, ...], ...]:
        return self.uncovered + self.overlapping

    @property
    def ok(self) -> bool:
        return self.covering and self.disjoint


def check_cover_semantic(sig: Signature, tel: Telescope, leaves: Sequence[tuple[Telescope, Sequence[Term]]], bound: Bound = Bound()) -> CoverReport:
    """Count, for every enumerated environment of ``tel``, the leaf instances landing on it."""
    model = SetModel(sig, bound)
    envs = model.enum_telescope(tel)
    hits: dict[Tuple[Value, ...], int] = {e: 0 for e in envs}
    for delta, pattern in leaves:
        for d in model.enum_telescope(delta):
            img = model.image(d, pattern)
            if img in hits:
                hits[img] += 1
    uncovered = tuple(e for e in envs if hits[e] == 0)
    overlapping = tuple(e for e in envs if hits[e] > 1)
    return CoverReport(not uncovered, not overlapping, len(envs), uncovered, overlapping)


def amalgamate(
    sig: Signature,
    tel: Telescope,
    leaves: Sequence[tuple[Telescope, Sequence[Term]]],
    tables: Sequence[dict],
    bound: Bound = Bound(),
) -> dict:
    """Glue per-leaf tables (leaf environment to value) into one table on ``tel``."""
    model = SetModel(sig, bound)
    out: dict = {}
    for (delta, pattern), table in zip(leaves, tables):
        for d in model.enum_telescope(delta):
            img = model.image(d, pattern)
            if d not in table:
                continue
            if img in out and out[img] != table[d]:
                raise ConflictingBranches(f"two branches disagree on {img!r}")
            out[img] = table[d]
    for e in model.enum_telescope(tel):
        if e not in out:
            raise NoSemanticBranch(f"no branch defines a value at {e!r}")
    return {e: out[e] for e in model.enum_telescope(tel)}


def unifiers(sig: Signature, tel: Telescope, ty: Term, t1: Term, t2: Term, bound: Bound = Bound()) -> list[Tuple[Value, ...]]:
    """Environments of ``tel`` on which ``t1`` and ``t2`` denote equal values."""
    model = SetModel(sig, bound)
    out = []
    for env in model.enum_telescope(tel):
        if model.equal(model.eval(env, ty), model.eval(env, t1), model.eval(env, t2)):
            out.append(env)
    return out


# -- reading values back ------------------------------------------------------


def reify(model: SetModel, code: Code, v: Value) -> Term:
    """A closed term denoting ``v`` at type ``code``.

    Functions come back as a lambda over a match on their (finite) graph; the
    type annotations inside that match are placeholders, so the result is for
    evaluation, not for type checking.
    """
    match code, v:
        case CUniv(), _:
            return reify_code(model, v)
        case CEq(ty, _, _), VRefl(of):
            return Refl(reify(model, ty, of))
        case CTyCon(name, params), VCon(con, fields):
            ptel = model.sig.params(name)
            pcodes = model.tel_codes(ptel, params)
            ps = tuple(reify(model, c, p) for c, p in zip(pcodes, params))
            fcodes = model.field_codes(params, con, fields)
            return DataCon(con, ps + tuple(reify(model, c, f) for c, f in zip(fcodes, fields)))
        case CPi(), VFun(dom, graph):
            branches = tuple(
                Branch(Telescope(), (reify(model, dom, d),), reify(model, model.cod(code, d), r)) for d, r in graph
            )
            return Lam("x", Match((Var(0),), Telescope.of(("x", Type())), Type(), branches))
    raise OracleError(f"cannot read back {v!r} at {code!r}")


def reify_code(model: SetModel, code: Value) -> Term:
    match code:
        case CUniv():
            return Type()
        case CTyCon(name, params):
            pcodes = model.tel_codes(model.sig.params(name), params)
            return TyCon(name, tuple(reify(model, c, p) for c, p in zip(pcodes, params)))
        case CEq(ty, lhs, rhs):
            return Eq(reify_code(model, ty), reify(model, ty, lhs), reify(model, ty, rhs))
    raise OracleError(f"cannot read back the type {code!r}")


def show_value(v: Value) -> str:
    match v:
        case VCon(name, fields):
            return name if not fields else f"{name}({', '.join(show_value(f) for f in fields)})"
        case VRefl(of):
            return f"refl({show_value(of)})"
        case VFun(_, graph):
            return "{" + ", ".join(f"{show_value(d)} |-> {show_value(r)}" for d, r in graph) + "}"
        case VClosure():
            return "<closure>"
        case CTyCon(name, params):
            return name if not params else f"{name}({', '.join(show_value(p) for p in params)})"
        case CUniv():
            return "Type"
        case CEq(_, lhs, rhs):
            return f"Eq({show_value(lhs)}, {show_value(rhs)})"
        case CPi():
            return "<Pi>"
    return repr(v)
