"""A small conjunctive query language over topic maps.

Grammar (keywords are case-insensitive)::

    query  := filter { "and" filter } [ "->" step { "->" step } ]
    filter := "name(" STRING ")" | "contains(" STRING ")" | "type(" IDENT ")"
            | "id(" IDENT ")" | "scope(" IDENT { "," IDENT } ")"
    step   := "assoc(" IDENT ")" [ ".role(" IDENT ")" ] [ ".to(" IDENT ")" ]

STRING is double-quoted with backslash escapes. IDENT is an XML NCName;
``~`` is also accepted so ids produced by merging stay addressable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .model import TopicMap

__all__ = [
    "Filter",
    "Query",
    "QuerySyntaxError",
    "ResultSet",
    "Step",
    "eval_query",
    "explain",
    "parse_query",
]

FILTER_KINDS = ("name", "name-substring", "type", "id", "scope-context")
_KEYWORD_KIND = {
    "name": "name",
    "contains": "name-substring",
    "type": "type",
    "id": "id",
    "scope": "scope-context",
}
_LABEL = {"name": "name", "name-substring": "contains", "type": "type", "id": "id",
          "scope-context": "scope"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<punct>[(),.])
  | (?P<string>")
  | (?P<word>[^\W\d][\w.\-~·]*)
    """,
    re.VERBOSE,
)
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r"}


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, offset: int, expected: list):
        self.offset = offset
        self.expected = list(expected)
        super().__init__(f"{message} at byte {offset} (expected {' or '.join(self.expected)})")


@dataclass(frozen=True)
class Filter:
    kind: str
    argument: object

    def __post_init__(self) -> None:
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.kind in ("name", "name-substring") and not self.argument:
            raise ValueError("name filters need a non-empty string")
        if self.kind == "scope-context":
            object.__setattr__(self, "argument", tuple(self.argument))


@dataclass(frozen=True)
class Step:
    association_type: Optional[str] = None
    via_role: Optional[str] = None
    to_role: Optional[str] = None

    def __post_init__(self) -> None:
        if self.association_type is None and self.via_role is None and self.to_role is None:
            raise ValueError("a traversal step needs at least one constraint")

    def __str__(self) -> str:
        s = f"assoc({self.association_type or '*'})"
        if self.via_role:
            s += f".role({self.via_role})"
        if self.to_role:
            s += f".to({self.to_role})"
        return s


@dataclass(frozen=True)
class Query:
    filters: tuple
    traversal: tuple = ()

    def __post_init__(self) -> None:
        if not self.filters:
            raise ValueError("a query needs at least one filter")
        object.__setattr__(self, "filters", tuple(self.filters))
        object.__setattr__(self, "traversal", tuple(self.traversal))


@dataclass
class ResultSet:
    topics: list = field(default_factory=list)
    matched_names: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    trace: list = field(default_factory=list)


# -- parsing -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = self._lex(text)
        self.i = 0

    def offset(self, char_pos: int) -> int:
        return len(self.text[:char_pos].encode("utf-8"))

    def fail(self, message, pos, expected):
        raise QuerySyntaxError(message, self.offset(pos), expected)

    def _lex(self, text):
        tokens, pos = [], 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                self.fail(f"unexpected character {text[pos]!r}", pos, ["a token"])
            kind = m.lastgroup
            if kind == "string":
                value, end = self._string(text, pos)
                tokens.append(("string", value, pos))
                pos = end
                continue
            if kind != "ws":
                tokens.append((kind, m.group(), pos))
            pos = m.end()
        tokens.append(("eof", "", len(text)))
        return tokens

    def _string(self, text, start):
        out, pos = [], start + 1
        while pos < len(text):
            c = text[pos]
            if c == '"':
                return "".join(out), pos + 1
            if c == "\\":
                if pos + 1 >= len(text):
                    break
                nxt = text[pos + 1]
                out.append(_ESCAPES.get(nxt, nxt))
                pos += 2
                continue
            out.append(c)
            pos += 1
        self.fail("unterminated string literal", start, ['closing \'"\''])

    def peek(self):
        return self.tokens[self.i]

    def take(self, expected_text=None, kind=None, expected=None):
        tok = self.peek()
        ok = (kind is None or tok[0] == kind) and (
            expected_text is None or tok[1].lower() == expected_text
        )
        if not ok:
            want = expected or [repr(expected_text) if expected_text else kind]
            found = tok[1] if tok[0] != "eof" else "end of input"
            self.fail(f"unexpected {found!r}", tok[2], want)
        self.i += 1
        return tok

    def ident(self):
        return self.take(kind="word", expected=["identifier"])[1]

    def query(self) -> Query:
        filters = [self.filter()]
        while self.peek()[0] == "word" and self.peek()[1].lower() == "and":
            self.i += 1
            filters.append(self.filter())
        steps = []
        while self.peek()[0] == "arrow":
            self.i += 1
            steps.append(self.step())
        tok = self.peek()
        if tok[0] != "eof":
            want = ["'and'", "'->'", "end of input"] if not steps else ["'->'", "end of input"]
            self.fail(f"unexpected {tok[1]!r}", tok[2], want)
        return Query(tuple(filters), tuple(steps))

    def filter(self) -> Filter:
        tok = self.peek()
        kind = _KEYWORD_KIND.get(tok[1].lower()) if tok[0] == "word" else None
        if kind is None:
            self.fail(f"unexpected {tok[1] or 'end of input'!r}", tok[2],
                      ["'name'", "'contains'", "'type'", "'id'", "'scope'"])
        self.i += 1
        self.take("(")
        if kind in ("name", "name-substring"):
            s = self.take(kind="string", expected=["string literal"])
            if not s[1]:
                self.fail("empty name", s[2], ["non-empty string literal"])
            arg = s[1]
        elif kind == "scope-context":
            ids = [self.ident()]
            while self.peek()[1] == ",":
                self.i += 1
                ids.append(self.ident())
            arg = tuple(ids)
        else:
            arg = self.ident()
        self.take(")", expected=["')'"])
        return Filter(kind, arg)

    def step(self) -> Step:
        tok = self.peek()
        if not (tok[0] == "word" and tok[1].lower() == "assoc"):
            self.fail(f"unexpected {tok[1] or 'end of input'!r}", tok[2], ["'assoc'"])
        self.i += 1
        self.take("(")
        atype = self.ident()
        self.take(")", expected=["')'"])
        via = to = None
        for part in ("role", "to"):
            if self.peek()[1] == "." and self.tokens[self.i + 1][1].lower() == part:
                self.i += 2
                self.take("(")
                value = self.ident()
                self.take(")", expected=["')'"])
                if part == "role":
                    via = value
                else:
                    to = value
        if self.peek()[1] == ".":
            tok = self.tokens[self.i + 1]
            self.fail(f"unexpected {tok[1] or 'end of input'!r}", tok[2],
                      ["'role'", "'to'"] if via is None else ["'to'"])
        return Step(atype, via, to)


def parse_query(text: str) -> Query:
    return _Parser(text).query()


# -- evaluation --------------------------------------------------------------


def _plural(n: int, word: str) -> str:
    return f"{n} {word}{'' if n == 1 else 's'}"


def _context(q: Query, context) -> Optional[frozenset]:
    themes = [t for f in q.filters if f.kind == "scope-context" for t in f.argument]
    if context is None and not any(f.kind == "scope-context" for f in q.filters):
        return None
    return frozenset(themes) | frozenset(context or ())


def _evaluate(tm: TopicMap, q: Query, context=None) -> ResultSet:
    rs = ResultSet()
    unknown = []

    def resolve(ident, where):
        r = tm.resolve_id(ident)
        if r is None:
            unknown.append(ident)
            msg = f"unknown id {ident!r} in {where}"
            rs.diagnostics.append(msg)
            rs.trace.append(f"info: {msg}")
        return r

    resolved_ctx = _context(q, context)
    if resolved_ctx is not None:
        resolved_ctx = frozenset(tm.resolve_id(t) or t for t in resolved_ctx)
    matched: dict = {}
    current = set(tm.topics)
    for f in q.filters:
        label = _LABEL[f.kind]
        if f.kind in ("name", "name-substring"):
            needle = f.argument.casefold()
            keep = set()
            pool = tm.topics_named(f.argument) if f.kind == "name" else tm.topics.values()
            for t in pool:
                if t.id not in current:
                    continue
                hits = [
                    n for n in t.names_in_context(resolved_ctx)
                    if (n.value.casefold() == needle if f.kind == "name" else needle in n.value.casefold())
                ]
                if hits:
                    keep.add(t.id)
                    bucket = matched.setdefault(t.id, [])
                    bucket.extend(n for n in hits if n not in bucket)
            current = keep
        elif f.kind == "type":
            ty = resolve(f.argument, "type filter")
            current = {t.id for t in tm.topics_of_type(ty)} & current if ty else set()
        elif f.kind == "id":
            tid = resolve(f.argument, "id filter")
            current = {tid} & current if tid else set()
        else:
            resolved = [resolve(x, "scope filter") for x in f.argument]
            if None in resolved:
                current = set()
            else:
                current = {i for i in current if tm.topics[i].names_in_context(resolved_ctx)}
        rs.trace.append(f"filter {label}: {_plural(len(current), 'candidate')}")
    for k, step in enumerate(q.traversal, 1):
        ids = [step.association_type, step.via_role, step.to_role]
        rids = [resolve(x, f"step {k}") if x is not None else None for x in ids]
        if any(x is not None and r is None for x, r in zip(ids, rids)):
            current = set()
        else:
            atype, via, to = rids
            reached = set()
            for tid in sorted(current):
                for a, _roles in tm.associations_of(tid, atype, via):
                    for m in a.members:
                        if to is None or m.role_type == to:
                            reached.update(p for p in m.players if p != tid)
            current = {tm.resolve_id(p) or p for p in reached if p in tm.topics}
            matched = {}
        rs.trace.append(f"step {k} {step}: {_plural(len(current), 'topic')}")
    if unknown:
        current = set()
    rs.topics = sorted(current)
    for tid in rs.topics:
        names = matched.get(tid)
        if names is None:
            names = tm.topics[tid].names_in_context(resolved_ctx)
        rs.matched_names[tid] = [n for n in tm.topics[tid].names if n in names]
    rs.trace.append(f"result: {_plural(len(rs.topics), 'topic')}")
    return rs


def eval_query(tm: TopicMap, q, context=None) -> ResultSet:
    """Evaluate ``q`` (a :class:`Query` or query text).

    ``context`` is an optional set of theme ids; it is combined with any
    ``scope()`` filters. Without either, names are not scope-filtered.
    """
    if isinstance(q, str):
        q = parse_query(q)
    return _evaluate(tm, q, context)


def explain(tm: TopicMap, q, context=None) -> str:
    """Per-filter candidate counts and per-step expansion counts."""
    return "".join(f"{line}\n" for line in eval_query(tm, q, context).trace)
