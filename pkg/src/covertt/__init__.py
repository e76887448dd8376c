"""Type checker, coverage checker and evaluator for a small dependent type theory
with coverage-parameterised pattern matching, plus a finite set-model oracle."""

__version__ = "0.1.0"
