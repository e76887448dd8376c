"""Comparisons between the kernel (syntax, reduction) and the set model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from covertt import coverage, oracle
from covertt.conversion import Fuel, Matched, match_branch, normalize, whnf
from covertt.syntax import Match, Signature, Telescope, Term, apply_subst, id_subst, iter_subterms


@dataclass(frozen=True)
class Agreement:
    checked: int = 0
    agreed: int = 0
    skipped: int = 0
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return self.checked == self.agreed

    def __add__(self, other: "Agreement") -> "Agreement":
        return Agreement(
            self.checked + other.checked,
            self.agreed + other.agreed,
            self.skipped + other.skipped,
            self.failures + other.failures,
        )


def matches_of(t: Term) -> list[Match]:
    return [s for s in iter_subterms(t) if isinstance(s, Match)]


def open_match(m: Match) -> Match:
    """The same match with its scrutinees replaced by the variables of its telescope."""
    return Match(tuple(id_subst(m.tel).terms), m.tel, m.motive, m.branches)


def match_equation(sig: Signature, m: Match, bound: oracle.Bound, fuel: Optional[Fuel] = None) -> Agreement:
    """For every environment of the match telescope, compare three routes.

    The model's semantic branch selection, the kernel's syntactic branch
    selection (evaluating the selected body at the kernel's solution), and
    the model's value of the kernel's weak-head reduct must all coincide.
    """
    model = oracle.SetModel(sig, bound)
    checked = agreed = skipped = 0
    failures = []
    for env in model.enum_telescope(m.tel):
        checked += 1
        try:
            codes = model.tel_codes(m.tel, env)
            scrut = tuple(oracle.reify(model, c, v) for c, v in zip(codes, env))
            closed = Match(scrut, m.tel, m.motive, m.branches)
            motive = model.eval(env, m.motive)
            semantic = model.eval((), closed)
            r = match_branch(model.sig, scrut, m.branches, fuel or Fuel())
            if not isinstance(r, Matched):
                failures.append((env, f"kernel: {type(r).__name__}"))
                continue
            sol = tuple(model.eval((), s) for s in r.solution)
            syntactic = model.eval(sol, m.branches[r.branch].body)
            reduct = model.eval((), whnf(model.sig, closed, fuel or Fuel()))
        except oracle.BoundExceeded:
            checked -= 1
            skipped += 1
            continue
        if model.equal(motive, semantic, syntactic) and model.equal(motive, semantic, reduct):
            agreed += 1
        else:
            failures.append((env, "values differ"))
    return Agreement(checked, agreed, skipped, tuple(failures))


def substitution_equation(
    sig: Signature,
    t: Term,
    theta: Sequence[Term],
    domain: Telescope,
    bound: oracle.Bound,
    limit: Optional[int] = None,
    ty: Optional[Term] = None,
) -> Agreement:
    """``eval(d, t[theta]) == eval(eval(d, theta), t)`` for environments ``d`` of ``domain``.

    ``ty`` is the type of ``t`` (over the codomain of ``theta``); with it,
    function values are compared extensionally, otherwise structurally.
    """
    model = oracle.SetModel(sig, bound)
    t_theta = apply_subst(t, theta)
    checked = agreed = skipped = 0
    failures = []
    for k, d in enumerate(model.enum_telescope(domain)):
        if limit is not None and k >= limit:
            break
        try:
            inner = tuple(model.eval(d, s) for s in theta)
            lhs = model.eval(d, t_theta)
            rhs = model.eval(inner, t)
            same = lhs == rhs if ty is None else model.equal(model.eval(inner, ty), lhs, rhs)
        except oracle.BoundExceeded:
            skipped += 1
            continue
        checked += 1
        if same:
            agreed += 1
        else:
            failures.append((d, "values differ"))
    return Agreement(checked, agreed, skipped, tuple(failures))


def eval_agreement(sig: Signature, t: Term, bound: oracle.Bound, fuel: Optional[Fuel] = None) -> bool:
    """A closed term and its normal form denote the same value."""
    model = oracle.SetModel(sig, bound)
    return model.eval((), t) == model.eval((), normalize(sig, t, fuel or Fuel()))


@dataclass(frozen=True)
class MatchReport:
    definition: str
    index: int
    cover: oracle.CoverReport
    agreement: Agreement
    absurd_inhabited: int


def sweep(sig: Signature, names: Sequence[str], bound: oracle.Bound, fuel: Optional[Fuel] = None) -> list[MatchReport]:
    """Semantic check of every match in the named definitions."""
    out = []
    for name in names:
        body = sig.definition(name).body
        for k, m in enumerate(matches_of(body)):
            tree = coverage.check_cover(sig, m.tel, [(b.tel, b.pattern) for b in m.branches], fuel)
            cover = oracle.check_cover_semantic(sig, m.tel, coverage.leaves(tree), bound)
            model = oracle.SetModel(sig, bound)
            inhabited = sum(len(model.enum_telescope(a.tel)) for a in coverage.absurd_nodes(tree))
            out.append(MatchReport(name, k, cover, match_equation(sig, m, bound, fuel), inhabited))
    return out
