"""Finding and Violation value types.

A Finding is a static-configuration defect keyed to a control id; a Violation
is a runtime event recorded by the simulator.  Both are plain immutable data
so reports and traces stay deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class Finding:
    """One violated check in a declared configuration.

    ``related`` lists ids of elements implicated alongside ``subject`` (for
    example the link ids of a connecting path), so a repair can target the
    offending element mechanically.
    """

    control: str
    severity: Severity
    subject: str
    message: str
    related: tuple[str, ...] = ()

    def sort_key(self) -> tuple[str, str, str]:
        return (self.control, self.subject, self.message)

    def to_dict(self) -> dict:
        return {
            "control": self.control,
            "severity": self.severity.value,
            "subject": self.subject,
            "message": self.message,
            "related": list(self.related),
        }


@dataclass(frozen=True)
class Violation:
    """A control breach observed at a point in simulated time."""

    control: str
    ts: int
    subject: str
    detail: str

    def to_dict(self) -> dict:
        return {
            "kind": "violation",
            "control": self.control,
            "ts": self.ts,
            "subject": self.subject,
            "detail": self.detail,
        }


def sort_findings(findings: list[Finding]) -> list[Finding]:
    """Lexicographic (control, subject, message) order: reports reproduce byte-for-byte."""
    return sorted(findings, key=Finding.sort_key)
