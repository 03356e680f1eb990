"""Merging topic maps, collapsing duplicates and comparing maps up to ids."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations

from .model import SealedMapError, TopicMap, TopicMapError

__all__ = [
    "MergeReport",
    "MergeWarning",
    "deduplicate",
    "find_merge_candidates",
    "isomorphic",
    "merge_maps",
    "merge_topics",
]

SUBJECT_IDENTIFIER = "subject-identifier"
NAME_IN_SCOPE = "name-in-scope"
# same map-local id in two maps that share a base locator
SOURCE_LOCATOR = "source-locator"
EXPLICIT = "explicit"

# absorbed-id suffix for ids of the second map that collide with the first
COLLISION_MARK = "~"


class MergeWarning(UserWarning):
    pass


@dataclass
class MergeReport:
    merged_pairs: list = field(default_factory=list)
    alias_table: dict = field(default_factory=dict)
    renamed: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    dedup_counts: dict = field(
        default_factory=lambda: {"names": 0, "occurrences": 0, "associations": 0}
    )

    def record(self, survivor: str, absorbed: str, reason: str) -> None:
        self.merged_pairs.append((survivor, absorbed, reason))
        for k, v in self.alias_table.items():
            if v == absorbed:
                self.alias_table[k] = survivor
        self.alias_table[absorbed] = survivor

    def to_text(self) -> str:
        """One ``survivor <= absorbed [reason]`` line per merged pair."""
        return "".join(f"{s} <= {a} [{r}]\n" for s, a, r in self.merged_pairs)


def merge_topics(tm: TopicMap, survivor: str, absorbed: str, report: MergeReport = None,
                 reason: str = EXPLICIT) -> str:
    """Fold ``absorbed`` into ``survivor`` in place and return the survivor id.

    Every reference to the absorbed topic is rewritten. A self-typing that
    only arises from the rewrite is dropped with a :class:`MergeWarning`.
    """
    if tm.sealed:
        raise SealedMapError("merge_topics needs an unsealed map; use TopicMap.copy()")
    s_id, a_id = tm.resolve_id(survivor), tm.resolve_id(absorbed)
    if s_id is None or a_id is None:
        missing = survivor if s_id is None else absorbed
        raise TopicMapError(f"unresolvable topic reference {missing!r}")
    if s_id == a_id:
        raise TopicMapError(f"cannot merge topic {s_id!r} with itself")
    s, a = tm.topics[s_id], tm.topics[a_id]
    self_typed = s_id in s.types or a_id in a.types
    tm.remove_topic(a_id)
    s.subject_identifiers |= a.subject_identifiers
    s.types |= a.types
    for n in a.names:
        s.add_name(n)
    s.occurrences.extend(a.occurrences)
    s.implicit = s.implicit and a.implicit
    tm.relabel({a_id: s_id})
    tm.aliases[a_id] = s_id
    s = tm.topics[s_id]
    if s_id in s.types and not self_typed:
        s.types.discard(s_id)
        tm.rebuild_indexes()
        note = f"merging {a_id!r} into {s_id!r} would make it its own type; dropped"
        if report is not None:
            report.notes.append(note)
        warnings.warn(note, MergeWarning, stacklevel=2)
    if report is not None:
        report.record(s_id, a_id, reason)
    return s_id


def find_merge_candidates(tm: TopicMap) -> list:
    """Pairs ``(smaller id, larger id, reason)`` that denote the same subject.

    Topics merge when they share a subject identifier, or carry the same
    name value in the same non-empty scope. Unscoped namesakes stay apart.
    """
    found = {}
    by_sid: dict = {}
    by_name: dict = {}
    for t in tm.topics.values():
        for s in t.subject_identifiers:
            by_sid.setdefault(s, set()).add(t.id)
        for n in t.names:
            if n.scope:
                by_name.setdefault((n.value, n.scope), set()).add(t.id)
    for reason, groups in ((SUBJECT_IDENTIFIER, by_sid), (NAME_IN_SCOPE, by_name)):
        for ids in groups.values():
            for pair in combinations(sorted(ids), 2):
                found.setdefault(pair, reason)
    return [(x, y, r) for (x, y), r in sorted(found.items())]


def _collapse(tm: TopicMap, report: MergeReport, seeded=()) -> None:
    with warnings.catch_warnings():
        # self-type drops are recorded in report.notes instead
        warnings.simplefilter("ignore", MergeWarning)
        for x, y, reason in sorted(seeded):
            x, y = tm.resolve_id(x), tm.resolve_id(y)
            if x is not None and y is not None and x != y:
                merge_topics(tm, min(x, y), max(x, y), report, reason)
        # each merge removes a topic, so this terminates
        while True:
            todo = find_merge_candidates(tm)
            if not todo:
                return
            x, y, reason = todo[0]
            merge_topics(tm, x, y, report, reason)


def _dedup_in_place(tm: TopicMap) -> dict:
    counts = {"names": 0, "occurrences": 0, "associations": 0}
    for t in tm.topics.values():
        names = list(dict.fromkeys(t.names))
        occs = list(dict.fromkeys(t.occurrences))
        counts["names"] += len(t.names) - len(names)
        counts["occurrences"] += len(t.occurrences) - len(occs)
        t.names, t.occurrences = names, occs
    assocs = list(dict.fromkeys(tm.associations))
    counts["associations"] = len(tm.associations) - len(assocs)
    tm.replace_associations(assocs)
    return counts


def deduplicate(tm: TopicMap) -> tuple:
    """Return a sealed copy with equal names, occurrences and associations collapsed."""
    out = tm.copy()
    counts = _dedup_in_place(out)
    return out.seal(), counts


def _fresh_id(base: str, taken: set) -> str:
    k = 2
    while f"{base}{COLLISION_MARK}{k}" in taken:
        k += 1
    return f"{base}{COLLISION_MARK}{k}"


def merge_maps(a: TopicMap, b: TopicMap) -> tuple:
    """Merge two maps into a fresh sealed map; inputs are left untouched.

    Ids of ``b`` that collide with ids of ``a`` get a ``~2`` (``~3``...)
    suffix first. Topics are then merged to a fixpoint and the result is
    deduplicated.
    """
    report = MergeReport()
    out = a.copy()
    other = b.copy()
    b_ids = set(other.topics) | other.dangling
    taken = set(out.topics) | out.dangling | b_ids
    renames = {}
    for tid in sorted(b_ids):
        if tid in out.topics or tid in out.dangling:
            new = _fresh_id(tid, taken)
            taken.add(new)
            renames[tid] = new
    if renames:
        other.relabel(renames)
        report.renamed = dict(renames)
    for t in other.topics.values():
        out.add_topic(t)
    for assoc in other.associations:
        out.add_association(assoc)
    out.aliases.update(other.aliases)
    out.empty_scope_sites.extend(other.empty_scope_sites)
    out.rebuild_indexes()
    same_source = []
    if a.base_locator == b.base_locator:
        same_source = [(old, new, SOURCE_LOCATOR) for old, new in renames.items()
                       if old in out.topics and new in out.topics]
    _collapse(out, report, same_source)
    report.dedup_counts = _dedup_in_place(out)
    return out.seal(), report


def collapse_duplicates(tm: TopicMap) -> tuple:
    """Merge every candidate pair inside one map; like ``merge_maps(tm, empty)``."""
    out = tm.copy()
    report = MergeReport()
    _collapse(out, report)
    report.dedup_counts = _dedup_in_place(out)
    return out.seal(), report


# -- isomorphism -------------------------------------------------------------
#
# Colour refinement over both maps at once, then individualization with
# backtracking until a bijection is found that maps content exactly.

_DANGLING = ("dangling",)


def _nodes(tm: TopicMap) -> list:
    return sorted(set(tm.topics) | tm.dangling)


def _initial(tm: TopicMap, node: str) -> tuple:
    t = tm.topics.get(node)
    if t is None:
        return _DANGLING
    return ("topic", tuple(sorted(t.subject_identifiers)))


def _incidences(tm: TopicMap) -> dict:
    """Per node: list of (kind, payload) where payload mentions other nodes."""
    inc = {n: [] for n in _nodes(tm)}
    for t in tm.topics.values():
        for ty in t.types:
            inc[t.id].append(("type", ty))
            inc[ty].append(("instance", t.id))
        for n in t.names:
            inc[t.id].append(("name", (n.value, n.scope)))
            for th in n.scope:
                inc[th].append(("name-theme", (t.id, n.value)))
        for o in t.occurrences:
            inc[t.id].append(("occ", (o.occurrence_type, o.scope, o.resource)))
            for r in o.refs():
                inc[r].append(("occ-ref", (t.id, o.resource)))
    for i, a in enumerate(tm.associations):
        for r in set(a.refs()):
            inc[r].append(("assoc", i))
    return inc


class _Side:
    def __init__(self, tm: TopicMap):
        self.tm = tm
        self.nodes = _nodes(tm)
        self.inc = _incidences(tm)

    def assoc_sig(self, a, col):
        def c(x):
            return col[x] if x is not None else None

        members = sorted(
            (repr(c(m.role_type)), tuple(sorted(col[p] for p in m.players))) for m in a.members
        )
        return (repr(c(a.association_type)), tuple(sorted(col[x] for x in a.scope)), tuple(members))

    def signature(self, node, col):
        parts = []
        assoc_sigs = {}
        for kind, payload in self.inc[node]:
            if kind in ("type", "instance"):
                parts.append((kind, col[payload]))
            elif kind == "name":
                value, scope = payload
                parts.append((kind, value, tuple(sorted(col[x] for x in scope))))
            elif kind == "name-theme":
                parts.append((kind, col[payload[0]], payload[1]))
            elif kind == "occ":
                otype, scope, res = payload
                parts.append((kind, repr(col[otype]) if otype else "-",
                              tuple(sorted(col[x] for x in scope)), res.kind, res.value))
            elif kind == "occ-ref":
                parts.append((kind, col[payload[0]], payload[1].kind, payload[1].value))
            else:
                a = self.tm.associations[payload]
                if payload not in assoc_sigs:
                    assoc_sigs[payload] = self.assoc_sig(a, col)
                positions = []
                if a.association_type == node:
                    positions.append("type")
                if node in a.scope:
                    positions.append("theme")
                for m in a.members:
                    if m.role_type == node:
                        positions.append("role")
                    if node in m.players:
                        positions.append(("player", repr(col[m.role_type]) if m.role_type else "-"))
                parts.append((kind, assoc_sigs[payload], tuple(sorted(map(repr, positions)))))
        return (col[node], tuple(sorted(map(repr, parts))))


def _refine(sa: _Side, sb: _Side, ca: dict, cb: dict) -> tuple:
    """Refine both colourings jointly until the partition is stable."""
    while True:
        table: dict = {}
        na = {n: table.setdefault(sa.signature(n, ca), len(table)) for n in sa.nodes}
        nb = {n: table.setdefault(sb.signature(n, cb), len(table)) for n in sb.nodes}
        if len(set(na.values()) | set(nb.values())) == len(set(ca.values()) | set(cb.values())):
            return na, nb
        ca, cb = na, nb


def _canonical(tm: TopicMap, mapping: dict) -> tuple:
    def r(x):
        return mapping.get(x, x) if x is not None else None

    topics = {}
    for t in tm.topics.values():
        topics[r(t.id)] = (
            frozenset(t.subject_identifiers),
            frozenset((n.value, frozenset(map(r, n.scope))) for n in t.names),
            frozenset(Counter(o.relabel(mapping) for o in t.occurrences).items()),
            frozenset(map(r, t.types)),
        )
    assocs = Counter(a.relabel(mapping) for a in tm.associations)
    return topics, frozenset(assocs.items())


def _search(sa, sb, ca, cb, target) -> bool:
    ca, cb = _refine(sa, sb, ca, cb)
    if Counter(ca.values()) != Counter(cb.values()):
        return False
    classes: dict = {}
    for n in sa.nodes:
        classes.setdefault(ca[n], []).append(n)
    open_classes = [c for c, members in classes.items() if len(members) > 1]
    if not open_classes:
        inverse = {c: n for n, c in cb.items()}
        mapping = {n: inverse[ca[n]] for n in sa.nodes}
        return _canonical(sa.tm, mapping) == target
    c = min(open_classes, key=lambda k: (len(classes[k]), k))
    x = classes[c][0]
    mark = max(max(ca.values()), max(cb.values())) + 1
    for y in [n for n in sb.nodes if cb[n] == c]:
        ca2, cb2 = dict(ca), dict(cb)
        ca2[x] = cb2[y] = mark
        if _search(sa, sb, ca2, cb2, target):
            return True
    return False


def isomorphic(a: TopicMap, b: TopicMap) -> bool:
    """True iff some renaming of topic ids turns ``a`` into ``b``.

    Compares subject identifiers, names, occurrences, types and
    associations; name and occurrence order and the implicit flag are
    ignored.
    """
    if len(a.topics) != len(b.topics) or len(a.dangling) != len(b.dangling):
        return False
    if len(a.associations) != len(b.associations):
        return False
    if Counter(len(t.names) for t in a.topics.values()) != Counter(len(t.names) for t in b.topics.values()):
        return False
    sa, sb = _Side(a), _Side(b)
    table: dict = {}
    ca = {n: table.setdefault(_initial(a, n), len(table)) for n in sa.nodes}
    cb = {n: table.setdefault(_initial(b, n), len(table)) for n in sb.nodes}
    target = _canonical(b, {})
    return _search(sa, sb, ca, cb, target)
