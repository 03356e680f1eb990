"""XTM 1.0 reader and canonical writer for the element subset in use.

Recognized: topicMap, topic, instanceOf, topicRef, subjectIdentity,
subjectIndicatorRef, baseName, baseNameString, scope, occurrence,
resourceRef, resourceData, association, member, roleSpec.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from xml.parsers import expat

from .iri import InvalidIriError, Iri, resolve
from .model import (
    Association,
    DuplicateTopicError,
    Member,
    Name,
    Occurrence,
    ResourceLink,
    Topic,
    TopicMap,
)

__all__ = [
    "XTM_NS",
    "XLINK_NS",
    "ParseDiagnostic",
    "XtmDocument",
    "XtmParseError",
    "load_file",
    "parse_xtm",
    "serialize_xtm",
]

XTM_NS = "http://www.topicmaps.org/xtm/1.0/"
XLINK_NS = "http://www.w3.org/1999/xlink"

KNOWN_ELEMENTS = frozenset(
    "topicMap topic instanceOf topicRef subjectIdentity subjectIndicatorRef "
    "baseName baseNameString scope occurrence resourceRef resourceData "
    "association member roleSpec".split()
)


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    line: int
    column: int
    message: str
    element_path: str = ""
    code: str = ""

    def __str__(self) -> str:
        where = f" ({self.element_path})" if self.element_path else ""
        return f"{self.severity} {self.line}:{self.column}: {self.message}{where}"


class XtmParseError(ValueError):
    def __init__(self, diagnostics: list):
        self.diagnostics = list(diagnostics)
        errors = [d for d in self.diagnostics if d.severity == "error"]
        first = errors[0] if errors else None
        super().__init__(str(first) if first else "XTM parse failed")


@dataclass
class XtmDocument:
    map: TopicMap
    diagnostics: list = field(default_factory=list)
    source_locator: Optional[Iri] = None

    @property
    def warnings(self) -> list:
        return [d for d in self.diagnostics if d.severity == "warning"]


class _Node:
    __slots__ = ("ns", "local", "attrs", "children", "text", "line", "col", "path")

    def __init__(self, ns, local, attrs, line, col, path):
        self.ns = ns
        self.local = local
        self.attrs = attrs
        self.children = []
        self.text = []
        self.line = line
        self.col = col
        self.path = path

    def href(self) -> Optional[str]:
        return self.attrs.get((XLINK_NS, "href"))

    def string(self) -> str:
        return _trim_layout("".join(self.text))


def _split(name: str) -> tuple:
    ns, sep, local = name.rpartition(" ")
    return (ns if sep else None, local)


def _read_tree(data: bytes) -> _Node:
    parser = expat.ParserCreate(namespace_separator=" ")
    parser.buffer_text = True
    stack: list = []
    root: list = []
    counters: list = [{}]

    def start(name, attrs):
        ns, local = _split(name)
        split_attrs = {_split(k): v for k, v in attrs.items()}
        seen = counters[-1]
        seen[local] = seen.get(local, 0) + 1
        parent = stack[-1].path if stack else ""
        path = f"{parent}/{local}[{seen[local]}]"
        node = _Node(ns, local, split_attrs, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1, path)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)
        counters.append({})

    def end(name):
        stack.pop()
        counters.pop()

    def chars(text):
        if stack:
            stack[-1].text.append(text)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    parser.Parse(data, True)
    return root[0]


def _trim_layout(text: str) -> str:
    """Drop leading/trailing whitespace runs that contain a line break.

    Such runs only come from pretty-printing the element content onto its
    own lines; whitespace on the same line as the text is kept.
    """
    lead = len(text) - len(text.lstrip())
    if "\n" in text[:lead]:
        text = text[lead:]
    trail = len(text) - len(text.rstrip())
    if trail and "\n" in text[len(text) - trail:]:
        text = text[: len(text) - trail]
    return text


def _stub_id(iri: str) -> str:
    return "ext-" + hashlib.sha1(iri.encode("utf-8")).hexdigest()[:12]


class _Reader:
    def __init__(self, base_locator: str):
        self.map = TopicMap(base_locator)
        self.base = self.map.base_locator
        self.base_doc = self.base.split("#", 1)[0]
        self.diagnostics: list = []
        self.first_ref: dict = {}
        self.external: dict = {}

    def diag(self, severity, node, message, code):
        self.diagnostics.append(
            ParseDiagnostic(severity, node.line, node.col, message, node.path, code)
        )

    def warn(self, node, message, code="SKIPPED_ELEMENT"):
        self.diag("warning", node, message, code)

    def error(self, node, message, code="INVALID_CONTENT"):
        self.diag("error", node, message, code)

    def children(self, node, allowed):
        """Yield XTM children named in ``allowed``; warn about the rest."""
        for c in node.children:
            if c.ns != XTM_NS:
                self.warn(c, f"element {c.local!r} outside the XTM namespace skipped", "FOREIGN_ELEMENT")
            elif c.local not in KNOWN_ELEMENTS:
                self.warn(c, f"unsupported XTM element {c.local!r} skipped", "UNKNOWN_ELEMENT")
            elif c.local not in allowed:
                self.warn(c, f"element {c.local!r} not allowed inside {node.local!r}; skipped")
            else:
                yield c

    def iri(self, node, href) -> Optional[Iri]:
        try:
            return resolve(href, self.base)
        except InvalidIriError as exc:
            self.error(node, str(exc), "INVALID_IRI")
            return None

    def topic_ref(self, node) -> Optional[str]:
        """Map a topicRef/subjectIndicatorRef to a map-local topic id."""
        href = node.href()
        if href is None:
            self.error(node, f"{node.local} without xlink:href", "MISSING_HREF")
            return None
        if node.local == "topicRef" and href.startswith("#"):
            target = href[1:]
        else:
            iri = self.iri(node, href)
            if iri is None:
                return None
            doc, sep, frag = iri.partition("#")
            if node.local == "topicRef" and sep and frag and doc == self.base_doc:
                target = frag
            else:
                target = self.external.setdefault(iri, _stub_id(iri))
        if not target:
            self.error(node, "empty topic reference", "MISSING_HREF")
            return None
        self.first_ref.setdefault(target, node)
        return target

    def single_ref(self, node) -> Optional[str]:
        refs = [self.topic_ref(c) for c in self.children(node, {"topicRef", "subjectIndicatorRef"})]
        refs = [r for r in refs if r is not None]
        if not refs:
            self.warn(node, f"{node.local} without a topic reference; ignored")
            return None
        if len(refs) > 1:
            self.warn(node, f"{node.local} holds {len(refs)} references; using the first")
        return refs[0]

    def scope(self, node) -> frozenset:
        themes = []
        for c in self.children(node, {"topicRef", "subjectIndicatorRef"}):
            r = self.topic_ref(c)
            if r is not None:
                themes.append(r)
        if not themes:
            self.map.empty_scope_sites.append(f"line {node.line}:{node.path}")
            self.warn(node, "scope element without themes", "EMPTY_SCOPE")
        return frozenset(themes)

    def read_map(self, root):
        if root.ns != XTM_NS or root.local != "topicMap":
            self.error(root, f"root element must be XTM topicMap, found {root.local!r}", "BAD_ROOT")
            return
        topics, assocs = [], []
        for c in self.children(root, {"topic", "association"}):
            (topics if c.local == "topic" else assocs).append(c)
        for node in topics:
            self.read_topic(node)
        for node in assocs:
            self.read_association(node)
        self.reify_stubs()

    def read_topic(self, node):
        tid = node.attrs.get((None, "id"))
        if not tid:
            self.error(node, "topic without id attribute", "MISSING_ID")
            return
        if tid.startswith("#"):
            self.warn(node, f"topic id {tid!r} carries a leading '#'; stripped", "ID_FRAGMENT")
            tid = tid[1:]
        topic = Topic(tid)
        for c in self.children(node, {"instanceOf", "subjectIdentity", "baseName", "occurrence"}):
            if c.local == "instanceOf":
                r = self.single_ref(c)
                if r is not None:
                    topic.types.add(r)
            elif c.local == "subjectIdentity":
                for s in self.children(c, {"subjectIndicatorRef"}):
                    href = s.href()
                    if href is None:
                        self.error(s, "subjectIndicatorRef without xlink:href", "MISSING_HREF")
                        continue
                    iri = self.iri(s, href)
                    if iri is not None:
                        topic.subject_identifiers.add(iri)
            elif c.local == "baseName":
                name = self.read_name(c)
                if name is not None:
                    topic.add_name(name)
            else:
                occ = self.read_occurrence(c)
                if occ is not None:
                    topic.occurrences.append(occ)
        try:
            self.map.add_topic(topic)
        except DuplicateTopicError as exc:
            self.error(node, str(exc), "DUPLICATE_ID")

    def read_name(self, node) -> Optional[Name]:
        scope, value = frozenset(), None
        for c in self.children(node, {"scope", "baseNameString"}):
            if c.local == "scope":
                scope = self.scope(c)
            elif value is None:
                value = c.string()
            else:
                self.warn(c, "extra baseNameString ignored")
        if not value:
            self.warn(node, "baseName without a non-empty baseNameString; skipped", "EMPTY_NAME")
            return None
        return Name(value, scope)

    def read_occurrence(self, node) -> Optional[Occurrence]:
        otype, scope, resource = None, frozenset(), None
        for c in self.children(node, {"instanceOf", "scope", "resourceRef", "resourceData"}):
            if c.local == "instanceOf":
                otype = self.single_ref(c)
            elif c.local == "scope":
                scope = self.scope(c)
            elif resource is not None:
                self.warn(c, "occurrence already has a resource; extra one ignored")
            elif c.local == "resourceRef":
                href = c.href()
                if href is None:
                    self.error(c, "resourceRef without xlink:href", "MISSING_HREF")
                    return None
                iri = self.iri(c, href)
                if iri is None:
                    return None
                resource = ResourceLink.to(iri)
            else:
                resource = ResourceLink.inline(c.string())
        if resource is None:
            self.warn(node, "occurrence without resourceRef or resourceData; skipped", "EMPTY_OCCURRENCE")
            return None
        return Occurrence(resource, otype, scope)

    def read_association(self, node):
        atype, scope, members = None, frozenset(), []
        for c in self.children(node, {"instanceOf", "scope", "member"}):
            if c.local == "instanceOf":
                atype = self.single_ref(c)
            elif c.local == "scope":
                scope = self.scope(c)
            else:
                role, players = None, []
                for mc in self.children(c, {"roleSpec", "topicRef", "subjectIndicatorRef"}):
                    if mc.local == "roleSpec":
                        role = self.single_ref(mc)
                    else:
                        r = self.topic_ref(mc)
                        if r is not None:
                            players.append(r)
                if players:
                    members.append(Member(role, tuple(players)))
                else:
                    self.warn(c, "member without players; skipped", "EMPTY_MEMBER")
        if not members:
            self.warn(node, "association without members; skipped", "EMPTY_ASSOCIATION")
            return
        self.map.add_association(Association(tuple(members), atype, scope))

    def reify_stubs(self):
        iri_of = {v: k for k, v in self.external.items()}
        for ref in sorted(self.map.dangling):
            node = self.first_ref[ref]
            sids = {iri_of[ref]} if ref in iri_of else set()
            self.map.add_topic(Topic(ref, sids, implicit=True))
            self.warn(node, f"undeclared topic {ref!r} created implicitly", "IMPLICIT_TOPIC")


def parse_xtm(data: bytes, base_locator: str) -> XtmDocument:
    """Parse an XTM document into a sealed topic map.

    Raises :class:`XtmParseError` when any error-severity diagnostic arises;
    warnings are returned on the document.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    base = Iri(base_locator)
    try:
        root = _read_tree(data)
    except expat.ExpatError as exc:
        d = ParseDiagnostic(
            "error", max(exc.lineno, 1), exc.offset + 1,
            f"malformed XML: {expat.ErrorString(exc.code)}", "", "MALFORMED_XML",
        )
        raise XtmParseError([d]) from exc
    reader = _Reader(base)
    reader.read_map(root)
    diagnostics = sorted(reader.diagnostics, key=lambda d: (d.line, d.column))
    if any(d.severity == "error" for d in diagnostics):
        raise XtmParseError(diagnostics)
    reader.map.seal()
    return XtmDocument(reader.map, diagnostics, base)


def load_file(path) -> XtmDocument:
    p = Path(path).resolve()
    data = p.read_bytes()
    return parse_xtm(data, p.as_uri())


# -- writer ------------------------------------------------------------------

_TEXT_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", "\r": "&#13;"}
_ATTR_ESCAPES = {**_TEXT_ESCAPES, '"': "&quot;", "\n": "&#10;", "\t": "&#9;"}
_TEXT_RE = re.compile("[&<>\r]")
_ATTR_RE = re.compile('[&<>\r"\n\t]')


def _text(s: str) -> str:
    return _TEXT_RE.sub(lambda m: _TEXT_ESCAPES[m.group()], s)


def _attr(s: str) -> str:
    return _ATTR_RE.sub(lambda m: _ATTR_ESCAPES[m.group()], s)


def _opt_key(x: Optional[str]) -> tuple:
    return (x is not None, x or "")


def association_sort_key(a: Association) -> tuple:
    roles = tuple(sorted(_opt_key(m.role_type) for m in a.members))
    return (_opt_key(a.association_type), roles, a.signature())


class _Writer:
    def __init__(self):
        self.lines: list = []

    def emit(self, depth, text):
        self.lines.append("  " * depth + text)

    def ref(self, depth, topic_id):
        self.emit(depth, f'<topicRef xlink:href="#{_attr(topic_id)}"/>')

    def wrapped_ref(self, depth, tag, topic_id):
        self.emit(depth, f"<{tag}>")
        self.ref(depth + 1, topic_id)
        self.emit(depth, f"</{tag}>")

    def scope(self, depth, scope):
        if not scope:
            return
        self.emit(depth, "<scope>")
        for theme in sorted(scope):
            self.ref(depth + 1, theme)
        self.emit(depth, "</scope>")

    def topic(self, t: Topic):
        if not (t.types or t.subject_identifiers or t.names or t.occurrences):
            self.emit(1, f'<topic id="{_attr(t.id)}"/>')
            return
        self.emit(1, f'<topic id="{_attr(t.id)}">')
        for ty in sorted(t.types):
            self.wrapped_ref(2, "instanceOf", ty)
        if t.subject_identifiers:
            self.emit(2, "<subjectIdentity>")
            for s in sorted(t.subject_identifiers):
                self.emit(3, f'<subjectIndicatorRef xlink:href="{_attr(s)}"/>')
            self.emit(2, "</subjectIdentity>")
        for n in t.names:
            self.emit(2, "<baseName>")
            self.scope(3, n.scope)
            self.emit(3, f"<baseNameString>{_text(n.value)}</baseNameString>")
            self.emit(2, "</baseName>")
        for o in t.occurrences:
            self.emit(2, "<occurrence>")
            if o.occurrence_type is not None:
                self.wrapped_ref(3, "instanceOf", o.occurrence_type)
            self.scope(3, o.scope)
            if o.resource.kind == "reference":
                self.emit(3, f'<resourceRef xlink:href="{_attr(o.resource.reference)}"/>')
            else:
                self.emit(3, f"<resourceData>{_text(o.resource.data)}</resourceData>")
            self.emit(2, "</occurrence>")
        self.emit(1, "</topic>")

    def association(self, a: Association):
        self.emit(1, "<association>")
        if a.association_type is not None:
            self.wrapped_ref(2, "instanceOf", a.association_type)
        self.scope(2, a.scope)
        for m in sorted(a.members, key=Member.key):
            self.emit(2, "<member>")
            if m.role_type is not None:
                self.wrapped_ref(3, "roleSpec", m.role_type)
            for p in sorted(m.players):
                self.ref(3, p)
            self.emit(2, "</member>")
        self.emit(1, "</association>")


def serialize_xtm(tm: TopicMap) -> bytes:
    """Canonical XTM bytes: sorted topics and associations, 2-space indent."""
    w = _Writer()
    w.lines.append('<?xml version="1.0" encoding="UTF-8"?>')
    root = f'topicMap xmlns="{XTM_NS}" xmlns:xlink="{XLINK_NS}"'
    if not tm.topics and not tm.associations:
        w.lines.append(f"<{root}/>")
    else:
        w.lines.append(f"<{root}>")
        for tid in sorted(tm.topics):
            w.topic(tm.topics[tid])
        for a in sorted(tm.associations, key=association_sort_key):
            w.association(a)
        w.lines.append("</topicMap>")
    return ("\n".join(w.lines) + "\n").encode("utf-8")
