"""Shared fixtures-by-import for the test suite."""

from __future__ import annotations

import functools
from pathlib import Path

from covertt.parser import Elaborated, elaborate_telescope, elaborate_term, load, parse_telescope, parse_term
from covertt.syntax import Signature, Telescope, Term

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

POSITIVE = ["vec", "foldr1", "bool", "eqsym", "nat"]
NEGATIVE = ["bad", "bool_missing", "bool_dup", "not_a_type", "bad_subst", "unbound_param"]

# acceptance outcomes, printed by the terminal summary hook in conftest
RESULTS: dict[str, tuple[bool, str]] = {}


def record(label: str, ok: bool, detail: str = "") -> None:
    RESULTS[label] = (ok, detail)


@functools.lru_cache(maxsize=None)
def corpus(name: str) -> Elaborated:
    return load((CORPUS / f"{name}.ctt").read_text())


def corpus_path(name: str) -> str:
    return str(CORPUS / f"{name}.ctt")


def tel(sig: Signature, text: str, names: tuple[str, ...] = ()) -> Telescope:
    return elaborate_telescope(parse_telescope(text), sig, names)


def term(sig: Signature, text: str, names: tuple[str, ...] | Telescope = ()) -> Term:
    if isinstance(names, Telescope):
        names = names.names
    return elaborate_term(parse_term(text), sig, names)


BASE = """
data Empty { }
data Unit { tt }
data Bool { true; false }
data Nat { zero; suc(n : Nat) }
data Sum (A : Type, B : Type) { inl(x : A); inr(y : B) }
data NatPair { pair(a : Nat, b : Nat) }
data Vec (A : Type, n : Nat) {
  nil(eq : Eq(Nat, n, zero));
  cons(m : Nat, h : A, t : Vec(A, m), eq : Eq(Nat, n, suc(m)))
}
def not : Bool -> Bool :=
  \\b. match (b) : (b : Bool) to Bool { | (). (true) => false | (). (false) => true }
def one : Nat := suc(zero)
"""

BASE_SIG = load(BASE).sig
