"""JSON export of maps, diagnostics and search hits.

Key order is fixed by construction and lists are sorted the same way as in
the XTM writer, so equal inputs give byte-identical output.

Map layout::

    {"base_locator": str,
     "topics": [{"id", "implicit", "subject_identifiers", "types",
                 "names": [{"value", "scope"}],
                 "occurrences": [{"type", "scope", "resource": {"kind", "value"}}]}],
     "associations": [{"type", "scope", "members": [{"role", "players"}]}]}
"""

from __future__ import annotations

import json

from .model import Member, TopicMap
from .xtm import association_sort_key

__all__ = ["diagnostics_to_json", "hits_to_json", "map_to_dict", "map_to_json"]


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _resource(r) -> dict:
    return {"kind": r.kind, "value": r.value}


def map_to_dict(tm: TopicMap) -> dict:
    topics = []
    for tid in sorted(tm.topics):
        t = tm.topics[tid]
        topics.append({
            "id": t.id,
            "implicit": t.implicit,
            "subject_identifiers": sorted(t.subject_identifiers),
            "types": sorted(t.types),
            "names": [{"value": n.value, "scope": sorted(n.scope)} for n in t.names],
            "occurrences": [
                {"type": o.occurrence_type, "scope": sorted(o.scope), "resource": _resource(o.resource)}
                for o in t.occurrences
            ],
        })
    assocs = []
    for a in sorted(tm.associations, key=association_sort_key):
        assocs.append({
            "type": a.association_type,
            "scope": sorted(a.scope),
            "members": [
                {"role": m.role_type, "players": sorted(m.players)}
                for m in sorted(a.members, key=Member.key)
            ],
        })
    return {"base_locator": str(tm.base_locator), "topics": topics, "associations": assocs}


def map_to_json(tm: TopicMap) -> str:
    return _dumps(map_to_dict(tm))


def diagnostics_to_json(diagnostics) -> str:
    return _dumps([d.to_dict() for d in diagnostics])


def hits_to_json(hits) -> str:
    rows = []
    for rank, h in enumerate(hits, 1):
        rows.append({
            "rank": rank,
            "topic": h.topic,
            "score": f"{h.score.numerator}/{h.score.denominator}",
            "matched_names": [{"value": n.value, "scope": sorted(n.scope)} for n in h.matched_names],
            "occurrences": [
                {"type": o.occurrence_type, "scope": sorted(o.scope), "resource": _resource(o.resource)}
                for o in h.occurrences
            ],
        })
    return _dumps(rows)
