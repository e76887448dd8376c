"""User-facing error reports with source positions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from covertt import coverage
from covertt.conversion import FuelExhausted
from covertt.parser import ParseError, ScopeError
from covertt.typechecker import TypeCheckError

Span = tuple[int, int]


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    kind: str
    message: str
    span: Optional[Span]
    rule: str = ""
    decl: Optional[str] = None
    detail: Optional[str] = None  # e.g. the coverage error kind

    def position(self, text: str) -> tuple[int, int]:
        return line_col(text, self.span[0] if self.span else 0)

    def format(self, text: str, path: str = "<input>") -> str:
        line, col = self.position(text)
        kind = f"{self.kind}/{self.detail}" if self.detail else self.kind
        where = f" in {self.decl}" if self.decl else ""
        tag = f" [{self.rule}]" if self.rule else ""
        return f"{path}:{line}:{col}: {self.severity}[{kind}]{where}: {self.message}{tag}"


def line_col(text: str, offset: int) -> tuple[int, int]:
    offset = max(0, min(offset, len(text)))
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def from_exception(e: Exception, decl_spans: Optional[dict] = None) -> Diagnostic:
    """Map any checker, coverage or front-end failure to exactly one diagnostic."""
    decl_spans = decl_spans or {}
    match e:
        case ParseError():
            return Diagnostic("error", "SyntaxError", e.message, e.span)
        case ScopeError():
            return Diagnostic("error", "UnboundVariable", e.message, e.span, "TyVar")
        case TypeCheckError():
            span = e.span or decl_spans.get(e.decl)
            detail = type(e.cover_error).__name__ if e.cover_error is not None else None
            return Diagnostic("error", e.kind, e.message, span, e.rule, e.decl, detail)
        case coverage.CoverageError():
            return Diagnostic("error", "NotCovering", str(e), None, "TyCase", detail=e.kind)
        case FuelExhausted():
            return Diagnostic("error", "FuelExhausted", str(e), None)
    raise e
