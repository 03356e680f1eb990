"""Inverted index over topic names, resolving hits to occurrences.

Every name of a topic indexes it, so synonyms all lead to the same topic.
Tokens are maximal alphanumeric runs, lowercased; no stemming and no stop
words. A hit scores the fraction of distinct query tokens it matched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .model import TopicMap

__all__ = ["Index", "IndexStats", "Posting", "SearchHit", "build_index", "index_stats",
           "search", "tokenize"]

_WORD = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list:
    return [w.lower() for w in _WORD.findall(text)]


class Posting(NamedTuple):
    topic: str
    ordinal: int
    position: int


@dataclass(frozen=True)
class Index:
    postings: dict  # term -> tuple[Posting, ...] sorted, unique

    def lookup(self, term: str) -> tuple:
        return self.postings.get(term, ())


class IndexStats(NamedTuple):
    terms: int
    postings: int
    topics: int


@dataclass(frozen=True)
class SearchHit:
    topic: str
    score: Fraction
    matched_names: list
    occurrences: list


def build_index(tm: TopicMap) -> Index:
    table: dict = {}
    for tid in sorted(tm.topics):
        for ordinal, name in enumerate(tm.topics[tid].names):
            for pos, tok in enumerate(tokenize(name.value)):
                table.setdefault(tok, []).append(Posting(tid, ordinal, pos))
    return Index({term: tuple(sorted(set(p))) for term, p in sorted(table.items())})


def index_stats(index: Index) -> IndexStats:
    topics = {p.topic for ps in index.postings.values() for p in ps}
    return IndexStats(len(index.postings), sum(map(len, index.postings.values())), len(topics))


def search(
    index: Index,
    tm: TopicMap,
    query_text: str,
    type_filter: Optional[str] = None,
    context: Optional[frozenset] = None,
    limit: int = 10,
) -> list:
    """Rank topics whose visible names share tokens with ``query_text``."""
    if not isinstance(limit, int) or limit < 1:
        raise ValueError("limit must be a positive integer")
    terms = sorted(set(tokenize(query_text)))
    if not terms:
        return []
    allowed = None
    if type_filter is not None:
        ty = tm.resolve_id(type_filter)
        allowed = {t.id for t in tm.topics_of_type(ty)} if ty else set()
    if context is not None:
        context = frozenset(context)
    matched_terms: dict = {}
    matched_ordinals: dict = {}
    for term in terms:
        for p in index.lookup(term):
            if allowed is not None and p.topic not in allowed:
                continue
            topic = tm.topics.get(p.topic)
            if topic is None or p.ordinal >= len(topic.names):
                continue
            name = topic.names[p.ordinal]
            if context is not None and not name.scope <= context:
                continue
            matched_terms.setdefault(p.topic, set()).add(term)
            matched_ordinals.setdefault(p.topic, set()).add(p.ordinal)
    hits = []
    for tid, found in matched_terms.items():
        topic = tm.topics[tid]
        hits.append(SearchHit(
            tid,
            Fraction(len(found), len(terms)),
            [topic.names[i] for i in sorted(matched_ordinals[tid])],
            topic.occurrences_of(None, context),
        ))
    hits.sort(key=lambda h: (-h.score, h.topic))
    return hits[:limit]
