"""In-memory topic map: topics, associations, occurrences and scope.

Topic references are plain map-local id strings. A scope is a frozenset of
such ids; the empty scope is valid in every context.

After a topic has been added to a map, mutate it only through the
``TopicMap`` methods so the lookup indexes stay coherent.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import Optional, Union

from .iri import Iri

__all__ = [
    "Association",
    "DuplicateTopicError",
    "Member",
    "Name",
    "Occurrence",
    "Players",
    "ResourceLink",
    "SealedMapError",
    "Topic",
    "TopicMap",
    "applicable",
    "create_topic_map",
    "make_scope",
]

Scope = frozenset  # frozenset[str] of theme topic ids
Context = Optional[frozenset]


class TopicMapError(Exception):
    pass


class DuplicateTopicError(TopicMapError):
    pass


class SealedMapError(TopicMapError):
    pass


def make_scope(themes: Iterable[str] = ()) -> frozenset:
    themes = frozenset(themes)
    for t in themes:
        if not isinstance(t, str) or not t:
            raise ValueError(f"scope theme must be a topic id, got {t!r}")
    return themes


def applicable(scope: frozenset, context: Context) -> bool:
    """True when something scoped by ``scope`` is visible in ``context``.

    No context means no filtering. Otherwise the scope must be a subset of
    the context, which makes the empty scope visible everywhere.
    """
    return context is None or scope <= context


@dataclass(frozen=True)
class Name:
    value: str
    scope: frozenset = frozenset()

    def __post_init__(self) -> None:
        if not isinstance(self.value, str) or not self.value:
            raise ValueError("name value must be a non-empty string")
        object.__setattr__(self, "scope", make_scope(self.scope))


@dataclass(frozen=True)
class ResourceLink:
    kind: str
    reference: Optional[Iri] = None
    data: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind == "reference":
            if self.reference is None or self.data is not None:
                raise ValueError("reference link needs exactly a reference IRI")
            object.__setattr__(self, "reference", Iri(self.reference))
        elif self.kind == "inline":
            if self.data is None or self.reference is not None:
                raise ValueError("inline link needs exactly a data string")
        else:
            raise ValueError(f"unknown resource kind {self.kind!r}")

    @classmethod
    def to(cls, iri: str) -> "ResourceLink":
        return cls("reference", reference=Iri(iri))

    @classmethod
    def inline(cls, data: str) -> "ResourceLink":
        return cls("inline", data=data)

    @property
    def value(self) -> str:
        return self.reference if self.kind == "reference" else self.data


@dataclass(frozen=True)
class Occurrence:
    resource: ResourceLink
    occurrence_type: Optional[str] = None
    scope: frozenset = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", make_scope(self.scope))

    def refs(self) -> Iterator[str]:
        if self.occurrence_type is not None:
            yield self.occurrence_type
        yield from self.scope

    def relabel(self, mapping: dict) -> "Occurrence":
        t = self.occurrence_type
        return Occurrence(
            self.resource,
            mapping.get(t, t) if t is not None else None,
            frozenset(mapping.get(x, x) for x in self.scope),
        )


@dataclass(frozen=True)
class Member:
    role_type: Optional[str]
    players: tuple

    def __post_init__(self) -> None:
        players = tuple(self.players)
        if not players:
            raise ValueError("association member needs at least one player")
        object.__setattr__(self, "players", players)

    def key(self) -> tuple:
        return (self.role_type is not None, self.role_type or "", tuple(sorted(self.players)))


@dataclass(frozen=True, eq=False)
class Association:
    """Typed n-ary relation. Equality ignores member and player order."""

    members: tuple
    association_type: Optional[str] = None
    scope: frozenset = frozenset()

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise ValueError("association needs at least one member")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "scope", make_scope(self.scope))

    def signature(self) -> tuple:
        return (
            self.association_type is not None,
            self.association_type or "",
            tuple(sorted(self.scope)),
            tuple(sorted(m.key() for m in self.members)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Association):
            return NotImplemented
        return self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())

    def refs(self) -> Iterator[str]:
        if self.association_type is not None:
            yield self.association_type
        yield from self.scope
        for m in self.members:
            if m.role_type is not None:
                yield m.role_type
            yield from m.players

    def relabel(self, mapping: dict) -> "Association":
        def r(x):
            return mapping.get(x, x) if x is not None else None

        return Association(
            tuple(Member(r(m.role_type), tuple(r(p) for p in m.players)) for m in self.members),
            r(self.association_type),
            frozenset(r(x) for x in self.scope),
        )


@dataclass
class Topic:
    id: str
    subject_identifiers: set = field(default_factory=set)
    types: set = field(default_factory=set)
    names: list = field(default_factory=list)
    occurrences: list = field(default_factory=list)
    implicit: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("topic id must be a non-empty string")
        self.subject_identifiers = {Iri(s) for s in self.subject_identifiers}
        self.types = set(self.types)
        names, self.names = list(self.names), []
        for n in names:
            self.add_name(n)
        self.occurrences = list(self.occurrences)

    def add_name(self, name: Union[Name, str]) -> bool:
        """Append ``name`` unless an equal (value, scope) pair is present."""
        if isinstance(name, str):
            name = Name(name)
        if name in self.names:
            return False
        self.names.append(name)
        return True

    def names_in_context(self, context: Context = None) -> list:
        return [n for n in self.names if applicable(n.scope, context)]

    def occurrences_of(self, type_filter: Optional[str] = None, context: Context = None) -> list:
        return [
            o
            for o in self.occurrences
            if (type_filter is None or o.occurrence_type == type_filter)
            and applicable(o.scope, context)
        ]

    def refs(self) -> Iterator[str]:
        yield from self.types
        for n in self.names:
            yield from n.scope
        for o in self.occurrences:
            yield from o.refs()

    def copy(self) -> "Topic":
        return Topic(
            self.id,
            set(self.subject_identifiers),
            set(self.types),
            list(self.names),
            list(self.occurrences),
            self.implicit,
        )


class Players(list):
    """Player topics of an association; ``dangling`` lists unresolved ids."""

    def __init__(self, topics=(), dangling=()):
        super().__init__(topics)
        self.dangling = list(dangling)


def _empty_indexes() -> dict:
    return {"name": {}, "sid": {}, "type": {}}


class TopicMap:
    """A topic map under a single-writer contract until :meth:`seal`."""

    def __init__(self, base_locator: str):
        self.base_locator = Iri(base_locator)
        self.topics: dict[str, Topic] = {}
        self.associations: list[Association] = []
        # absorbed id -> surviving id, filled by merging
        self.aliases: dict[str, str] = {}
        # locators of <scope> elements that carried no themes
        self.empty_scope_sites: list[str] = []
        self._sealed = False
        self._dangling: set[str] = set()
        self._indexes = _empty_indexes()

    def __repr__(self) -> str:
        return (
            f"TopicMap({str(self.base_locator)!r}, topics={len(self.topics)}, "
            f"associations={len(self.associations)})"
        )

    # -- lifecycle ---------------------------------------------------------

    @property
    def sealed(self) -> bool:
        return self._sealed

    def seal(self) -> "TopicMap":
        self._sealed = True
        return self

    def _check_writable(self) -> None:
        if self._sealed:
            raise SealedMapError("topic map is sealed")

    def copy(self) -> "TopicMap":
        """Unsealed deep copy."""
        m = TopicMap(self.base_locator)
        m.topics = {k: t.copy() for k, t in self.topics.items()}
        m.associations = list(self.associations)
        m.aliases = dict(self.aliases)
        m.empty_scope_sites = list(self.empty_scope_sites)
        m.rebuild_indexes()
        return m

    # -- mutation ----------------------------------------------------------

    def add_topic(self, topic: Topic) -> str:
        self._check_writable()
        if topic.id in self.topics:
            raise DuplicateTopicError(f"duplicate topic id {topic.id!r}")
        self.topics[topic.id] = topic
        self._dangling.discard(topic.id)
        self._note_refs(topic.refs())
        self._index_topic(topic)
        return topic.id

    def add_association(self, assoc: Association) -> int:
        self._check_writable()
        if not assoc.members:
            raise ValueError("association needs at least one member")
        self.associations.append(assoc)
        self._note_refs(assoc.refs())
        return len(self.associations) - 1

    def add_name(self, topic_id: str, name: Union[Name, str]) -> bool:
        self._check_writable()
        t = self.topics[topic_id]
        added = t.add_name(name)
        if added:
            n = t.names[-1]
            self._indexes["name"].setdefault(n.value.casefold(), set()).add(t.id)
            self._note_refs(n.scope)
        return added

    def add_type(self, topic_id: str, type_id: str) -> None:
        self._check_writable()
        t = self.topics[topic_id]
        t.types.add(type_id)
        self._indexes["type"].setdefault(type_id, set()).add(t.id)
        self._note_refs([type_id])

    def add_occurrence(self, topic_id: str, occurrence: Occurrence) -> None:
        self._check_writable()
        self.topics[topic_id].occurrences.append(occurrence)
        self._note_refs(occurrence.refs())

    def add_subject_identifier(self, topic_id: str, iri: str) -> None:
        self._check_writable()
        iri = Iri(iri)
        self.topics[topic_id].subject_identifiers.add(iri)
        self._indexes["sid"].setdefault(iri, set()).add(topic_id)

    def remove_topic(self, topic_id: str) -> Topic:
        """Detach a topic; references to it become dangling."""
        self._check_writable()
        t = self.topics.pop(topic_id)
        self.rebuild_indexes()
        return t

    def relabel(self, mapping: dict) -> None:
        """Rewrite topic ids and every stored reference through ``mapping``.

        Names that become equal after the rewrite are collapsed.
        """
        self._check_writable()
        topics = {}
        for t in self.topics.values():
            new_id = mapping.get(t.id, t.id)
            if new_id in topics:
                raise DuplicateTopicError(f"relabel collides on {new_id!r}")
            names = [Name(n.value, frozenset(mapping.get(x, x) for x in n.scope)) for n in t.names]
            topics[new_id] = Topic(
                new_id,
                t.subject_identifiers,
                {mapping.get(x, x) for x in t.types},
                names,
                [o.relabel(mapping) for o in t.occurrences],
                t.implicit,
            )
        self.topics = topics
        self.associations = [a.relabel(mapping) for a in self.associations]
        self.aliases = {k: mapping.get(v, v) for k, v in self.aliases.items()}
        self.rebuild_indexes()

    def replace_associations(self, associations: Iterable[Association]) -> None:
        self._check_writable()
        self.associations = list(associations)
        self.rebuild_indexes()

    # -- indexes -----------------------------------------------------------

    def _note_refs(self, refs: Iterable[str]) -> None:
        for r in refs:
            if r not in self.topics:
                self._dangling.add(r)

    def _index_topic(self, t: Topic, idx: Optional[dict] = None) -> None:
        idx = self._indexes if idx is None else idx
        for n in t.names:
            idx["name"].setdefault(n.value.casefold(), set()).add(t.id)
        for s in t.subject_identifiers:
            idx["sid"].setdefault(s, set()).add(t.id)
        for ty in t.types:
            idx["type"].setdefault(ty, set()).add(t.id)

    def _fresh_state(self) -> tuple:
        idx = _empty_indexes()
        for t in self.topics.values():
            self._index_topic(t, idx)
        dangling = set()
        for t in self.topics.values():
            dangling.update(r for r in t.refs() if r not in self.topics)
        for a in self.associations:
            dangling.update(r for r in a.refs() if r not in self.topics)
        return idx, dangling

    def rebuild_indexes(self) -> None:
        self._indexes, self._dangling = self._fresh_state()

    def index_snapshot(self, fresh: bool = False) -> dict:
        """Comparable copy of the lookup indexes and the dangling ledger.

        With ``fresh=True`` the snapshot is computed from scratch instead of
        from the incrementally maintained structures.
        """
        idx, dangling = self._fresh_state() if fresh else (self._indexes, self._dangling)
        snap = {
            kind: {k: frozenset(v) for k, v in table.items() if v}
            for kind, table in idx.items()
        }
        snap["dangling"] = frozenset(dangling)
        return snap

    # -- reads -------------------------------------------------------------

    @property
    def topic_count(self) -> int:
        return len(self.topics)

    @property
    def dangling(self) -> frozenset:
        return frozenset(self._dangling)

    def resolve_id(self, topic_id: str) -> Optional[str]:
        """Map an id, possibly absorbed by a merge, to a live topic id."""
        if topic_id in self.topics:
            return topic_id
        alias = self.aliases.get(topic_id)
        if alias is not None and alias in self.topics:
            return alias
        return None

    def topic_by_id(self, topic_id: str) -> Optional[Topic]:
        resolved = self.resolve_id(topic_id)
        return self.topics[resolved] if resolved is not None else None

    def _topic(self, topic: Union[Topic, str]) -> Optional[Topic]:
        return self.topic_by_id(topic) if isinstance(topic, str) else topic

    def topics_of_type(self, type_id: str) -> list:
        ids = self._indexes["type"].get(type_id, ())
        return [self.topics[i] for i in sorted(ids)]

    def topics_named(self, value: str) -> list:
        """Topics with a name equal to ``value``, compared case-insensitively."""
        ids = self._indexes["name"].get(value.casefold(), ())
        return [self.topics[i] for i in sorted(ids)]

    def topics_with_identifier(self, iri: str) -> list:
        ids = self._indexes["sid"].get(Iri(iri), ())
        return [self.topics[i] for i in sorted(ids)]

    def associations_of(
        self,
        topic: Union[Topic, str],
        assoc_type: Optional[str] = None,
        role_type: Optional[str] = None,
    ) -> list:
        """``(association, roles)`` pairs for every association ``topic`` plays in.

        ``roles`` holds each role under which the topic plays (``None`` for a
        member without a role spec), restricted to ``role_type`` if given.
        """
        t = self._topic(topic)
        tid = t.id if t is not None else topic
        out = []
        for a in self.associations:
            if assoc_type is not None and a.association_type != assoc_type:
                continue
            roles = []
            for m in a.members:
                if tid in m.players and (role_type is None or m.role_type == role_type):
                    if m.role_type not in roles:
                        roles.append(m.role_type)
            if roles:
                out.append((a, tuple(roles)))
        return out

    def players(self, assoc: Association, role_type: Optional[str] = None) -> Players:
        found, dangling, seen = [], [], set()
        for m in assoc.members:
            if role_type is not None and m.role_type != role_type:
                continue
            for p in m.players:
                if p in seen:
                    continue
                seen.add(p)
                t = self.topic_by_id(p)
                if t is None:
                    dangling.append(p)
                else:
                    found.append(t)
        return Players(found, dangling)

    def implicit_topics(self) -> list:
        return [self.topics[i] for i in sorted(self.topics) if self.topics[i].implicit]

    def occurrence_count(self) -> int:
        return sum(len(t.occurrences) for t in self.topics.values())


def create_topic_map(base_locator: str) -> TopicMap:
    return TopicMap(base_locator)
