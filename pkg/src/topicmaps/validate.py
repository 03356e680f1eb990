"""Structural checks over a sealed topic map.

The check list is fixed; every diagnostic carries one of ``CODES``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import TopicMap

__all__ = ["CODES", "Diagnostic", "format_diagnostics", "has_errors", "validate"]

CODES = {
    "DANGLING_REF": "error",
    "DUPLICATE_NAME_ACROSS_TOPICS": "info",
    "EMPTY_SCOPE_ELEMENT": "warning",
    "IMPLICIT_TOPIC": "warning",
    "MEMBER_WITHOUT_ROLE": "warning",
    "TOPIC_WITHOUT_NAME": "info",
    "UNTYPED_ASSOCIATION": "warning",
}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.upper()} {self.code} {self.subject}: {self.message}"

    def to_dict(self) -> dict:
        return {"code": self.code, "severity": self.severity, "subject": self.subject,
                "message": self.message}


def _natural(s: str) -> tuple:
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", s))


def _d(code: str, subject: str, message: str) -> Diagnostic:
    return Diagnostic(code, CODES[code], subject, message)


def validate(tm: TopicMap) -> list:
    """Run every structural check; results sorted by (code, subject)."""
    out = []
    for ref in tm.dangling:
        out.append(_d("DANGLING_REF", f"topic:{ref}", "referenced topic is not declared"))
    for t in tm.topics.values():
        subject = f"topic:{t.id}"
        if t.implicit:
            out.append(_d("IMPLICIT_TOPIC", subject, "created implicitly for an undeclared reference"))
        if not t.names:
            out.append(_d("TOPIC_WITHOUT_NAME", subject, "topic has no base name"))
    for i, a in enumerate(tm.associations, 1):
        subject = f"association:{i}"
        if a.association_type is None:
            out.append(_d("UNTYPED_ASSOCIATION", subject, "association has no type"))
        for j, m in enumerate(a.members, 1):
            if m.role_type is None:
                players = ", ".join(m.players)
                out.append(_d("MEMBER_WITHOUT_ROLE", subject, f"member {j} ({players}) has no role spec"))
    for site in tm.empty_scope_sites:
        out.append(_d("EMPTY_SCOPE_ELEMENT", f"scope:{site}", "scope element lists no themes"))
    holders: dict = {}
    for t in tm.topics.values():
        for n in t.names:
            if n.scope:
                holders.setdefault((n.value, n.scope), set()).add(t.id)
    for (value, scope), ids in holders.items():
        if len(ids) > 1:
            first, *rest = sorted(ids)
            themes = ", ".join(sorted(scope))
            out.append(_d(
                "DUPLICATE_NAME_ACROSS_TOPICS", f"topic:{first}",
                f"name {value!r} in scope {{{themes}}} also on {', '.join(rest)}",
            ))
    out.sort(key=lambda d: (d.code, _natural(d.subject), d.message))
    return out


def has_errors(diagnostics) -> bool:
    return any(d.severity == "error" for d in diagnostics)


def format_diagnostics(diagnostics) -> str:
    return "".join(f"{d}\n" for d in diagnostics)
