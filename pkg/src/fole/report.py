"""Diagnostic findings returned by the validators.

Validators never raise on ill-formed input; they return a list of findings
and an empty list means the object is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True, order=True)
class Finding:
    code: str
    message: str
    where: tuple = field(default=(), compare=True)

    def __str__(self) -> str:
        loc = "/".join(str(w) for w in self.where)
        return f"{self.code}: {self.message}" + (f" [{loc}]" if loc else "")


def format_report(findings) -> str:
    if not findings:
        return "valid"
    return "\n".join(str(f) for f in findings)
