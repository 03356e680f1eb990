"""Topic map engine: XTM 1.0 I/O, merging, validation, queries and name search."""

from .index import Index, SearchHit, build_index, index_stats, search, tokenize
from .iri import InvalidIriError, Iri
from .merge import (
    MergeReport,
    MergeWarning,
    collapse_duplicates,
    deduplicate,
    find_merge_candidates,
    isomorphic,
    merge_maps,
    merge_topics,
)
from .model import (
    Association,
    DuplicateTopicError,
    Member,
    Name,
    Occurrence,
    ResourceLink,
    SealedMapError,
    Topic,
    TopicMap,
    TopicMapError,
    applicable,
    create_topic_map,
)
from .query import QuerySyntaxError, eval_query, explain, parse_query
from .validate import Diagnostic, validate
from .xtm import XtmDocument, XtmParseError, load_file, parse_xtm, serialize_xtm

__version__ = "0.1.0"
