import random

import pytest
from hypothesis import given, settings, strategies as st

from topicmaps import Name, QuerySyntaxError, Topic, TopicMap, eval_query, explain, parse_query
from topicmaps.query import Filter, Query, Step

from generators import random_map


class TestParse:
    def test_conjunction(self):
        q = parse_query('name("Tirupathi") and type(city)')
        assert q == Query((Filter("name", "Tirupathi"), Filter("type", "city")))

    def test_keywords_case_insensitive(self):
        assert parse_query('NAME("x") AND Type(city)') == parse_query('name("x") and type(city)')

    def test_traversal(self):
        q = parse_query("id(rajkumar-kannan) -> assoc(works-for).role(teaching)")
        assert q.traversal == (Step("works-for", "teaching", None),)
        q = parse_query("id(a) -> assoc(t).to(r) -> assoc(u).role(x).to(y)")
        assert q.traversal == (Step("t", None, "r"), Step("u", "x", "y"))

    def test_scope_list_and_escapes(self):
        q = parse_query(r'name("say \"hi\"\\") and scope(a, b)')
        assert q.filters == (Filter("name", 'say "hi"\\'), Filter("scope-context", ("a", "b")))

    def test_merged_ids(self):
        assert parse_query("id(rk~2)").filters == (Filter("id", "rk~2"),)

    @pytest.mark.parametrize("text, offset, expected", [
        ('name("")', 5, ["non-empty string literal"]),
        ("", 0, ["'name'", "'contains'", "'type'", "'id'", "'scope'"]),
        ("type(city", 9, ["')'"]),
        ("type(city) or id(a)", 11, ["'and'", "'->'", "end of input"]),
        ('name("x', 5, ["closing '\"'"]),
        ("id(a) -> role(x)", 9, ["'assoc'"]),
        ("id(a) -> assoc(t).bogus(x)", 18, ["'role'", "'to'"]),
        ('name("é") and', 14, ["'name'", "'contains'", "'type'", "'id'", "'scope'"]),
    ])
    def test_errors(self, text, offset, expected):
        with pytest.raises(QuerySyntaxError) as exc:
            parse_query(text)
        assert exc.value.offset == offset
        assert exc.value.expected == expected

    def test_invariants(self):
        with pytest.raises(ValueError):
            Query(())
        with pytest.raises(ValueError):
            Step()
        with pytest.raises(ValueError):
            Filter("name", "")


class TestEval:
    def test_tirupathi(self, tirupathi):
        assert eval_query(tirupathi, 'name("Tirupathi")').topics == ["tirupathi-city", "tirupathi-person"]
        assert eval_query(tirupathi, 'name("tirupathi") and type(city)').topics == ["tirupathi-city"]
        assert eval_query(tirupathi, 'name("Thirupathi")').topics == []

    def test_contains(self, faculty):
        assert eval_query(faculty, 'contains("kannan")').topics == ["rajkumar-kannan"]

    def test_traversal_employer(self, faculty):
        assert eval_query(faculty, "id(rajkumar-kannan) -> assoc(works-for)").topics == ["university"]
        assert eval_query(faculty, "id(university) -> assoc(works-for).to(teaching)").topics == ["rajkumar-kannan"]
        assert eval_query(faculty, "id(university) -> assoc(works-for).role(teaching)").topics == []

    def test_scope(self, faculty):
        q = 'name("Dr Rajkumar Kannan") and scope(university)'
        rs = eval_query(faculty, q)
        assert rs.topics == ["rajkumar-kannan"]
        assert rs.matched_names["rajkumar-kannan"] == [Name("Dr Rajkumar Kannan", {"university"})]
        assert eval_query(faculty, 'name("Dr Rajkumar Kannan")', context=frozenset()).topics == []
        assert eval_query(faculty, 'name("Dr Rajkumar Kannan")').topics == ["rajkumar-kannan"]

    def test_unknown_id(self, faculty):
        rs = eval_query(faculty, "type(dean)")
        assert rs.topics == [] and rs.diagnostics == ["unknown id 'dean' in type filter"]
        assert eval_query(faculty, 'name("Tirupathi") and scope(mars)').topics == []

    def test_explain(self, tirupathi):
        assert explain(tirupathi, 'name("Tirupathi") and type(city)') == (
            "filter name: 2 candidates\nfilter type: 1 candidate\nresult: 1 topic\n"
        )

    def test_explain_empty_map(self):
        tm = TopicMap("urn:x:e").seal()
        trace = explain(tm, 'name("x") and contains("y") -> assoc(t)')
        assert "info: unknown id 't' in step 1" in trace
        counts = [line.rsplit(": ", 1)[1] for line in trace.splitlines() if not line.startswith("info")]
        assert counts == ["0 candidates", "0 candidates", "0 topics", "0 topics"]

    def test_explain_unknown(self, faculty):
        assert "info: unknown id 'dean' in type filter" in explain(faculty, "type(dean)")

    def test_alias_ids_resolve(self):
        tm = TopicMap("urn:x:a")
        tm.add_topic(Topic("rk", names=[Name("R")]))
        tm.aliases["rk~2"] = "rk"
        assert eval_query(tm.seal(), "id(rk~2)").topics == ["rk"]


def naive(tm, f, context):
    out = set()
    for t in tm.topics.values():
        visible = [n for n in t.names if context is None or n.scope <= context]
        if f.kind == "name" and any(n.value.casefold() == f.argument.casefold() for n in visible):
            out.add(t.id)
        elif f.kind == "name-substring" and any(f.argument.casefold() in n.value.casefold() for n in visible):
            out.add(t.id)
        elif f.kind == "type" and f.argument in t.types:
            out.add(t.id)
        elif f.kind == "id" and f.argument == t.id:
            out.add(t.id)
    return out


def random_filter(rng, tm):
    ids = sorted(tm.topics) or ["none"]
    names = [n.value for t in tm.topics.values() for n in t.names] or ["x"]
    kind = rng.choice(["name", "name-substring", "type", "id"])
    if kind == "name":
        return Filter(kind, rng.choice(names).upper() if rng.random() < 0.3 else rng.choice(names))
    if kind == "name-substring":
        s = rng.choice(names)
        i = rng.randrange(len(s))
        return Filter(kind, s[i:i + rng.randint(1, 3)])
    return Filter(kind, rng.choice(ids))


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_conjunction_soundness(rng):
    tm = random_map(rng, 40)
    ids = sorted(tm.topics)
    context = None if rng.random() < 0.5 else frozenset(rng.sample(ids, min(len(ids), 3)))
    f1, f2 = random_filter(rng, tm), random_filter(rng, tm)
    both = set(eval_query(tm, Query((f1, f2)), context).topics)
    assert both == naive(tm, f1, context) & naive(tm, f2, context)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_traversal_symmetry(rng):
    tm = random_map(rng, 30)
    types = sorted({a.association_type for a in tm.associations if a.association_type})
    for atype in types[:3]:
        for t in sorted(tm.topics)[:10]:
            for u in eval_query(tm, Query((Filter("id", t),), (Step(atype),))).topics:
                assert t in eval_query(tm, Query((Filter("id", u),), (Step(atype),))).topics


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_context_monotone_and_deterministic(rng):
    tm = random_map(rng, 30)
    ids = sorted(tm.topics)
    small = frozenset(rng.sample(ids, min(len(ids), 2)))
    large = small | frozenset(rng.sample(ids, min(len(ids), 3)))
    f = random_filter(rng, tm)
    if f.kind not in ("name", "name-substring"):
        return
    q = Query((f,))
    assert set(eval_query(tm, q, small).topics) <= set(eval_query(tm, q, large).topics)
    rebuilt = tm.copy().seal()
    assert eval_query(tm, q, small) == eval_query(rebuilt, q, small)
