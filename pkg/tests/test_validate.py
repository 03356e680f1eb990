import random

from topicmaps import Association, Member, Name, Topic, TopicMap, merge_maps, parse_xtm, validate
from topicmaps.validate import CODES, format_diagnostics, has_errors

from generators import random_map


def codes(diags):
    return [(d.code, d.subject) for d in diags]


def test_fig4_standalone(load):
    diags = validate(load("fig4").map)
    assert [(c, s) for c, s in codes(diags) if c == "IMPLICIT_TOPIC"] == [
        ("IMPLICIT_TOPIC", "topic:journal"), ("IMPLICIT_TOPIC", "topic:pdf-format"),
    ]
    assert not has_errors(diags)


def test_empty_map():
    assert validate(TopicMap("urn:x:e").seal()) == []


def test_faculty_full_clean(faculty):
    assert validate(faculty) == []


def test_figures_merged_with_authored_stubs(load, faculty):
    # every stub of the figures is declared in faculty-full
    merged = faculty
    for fig in ("fig2", "fig3", "fig4", "fig5", "fig6"):
        merged, _ = merge_maps(merged, load(fig).map)
    assert not has_errors(validate(merged))


def test_each_code():
    tm = TopicMap("urn:x:v")
    tm.add_topic(Topic("a", names=[Name("N", {"a"})]))
    tm.add_topic(Topic("b", names=[Name("N", {"a"})]))
    tm.add_topic(Topic("stub", implicit=True))
    tm.add_association(Association((Member(None, ("a",)), Member("b", ("ghost",)))))
    tm.empty_scope_sites.append("line 3:/topicMap[1]/topic[1]/baseName[1]/scope[1]")
    diags = validate(tm.seal())
    assert sorted({d.code for d in diags}) == sorted(CODES)
    assert [d for d in diags if d.code == "DANGLING_REF"][0].subject == "topic:ghost"
    assert has_errors(diags)
    text = format_diagnostics(diags)
    assert "ERROR DANGLING_REF topic:ghost: referenced topic is not declared\n" in text
    assert "INFO DUPLICATE_NAME_ACROSS_TOPICS topic:a: name 'N' in scope {a} also on b\n" in text


def test_ordering_total_and_pure():
    rng = random.Random(5)
    for _ in range(20):
        tm = random_map(rng, 50)
        d1, d2 = validate(tm), validate(tm.copy().seal())
        assert d1 == d2
        assert [d.code for d in d1] == sorted(d.code for d in d1)


def test_no_dangling_after_parse(load):
    for fig in ("fig2", "fig3", "fig4", "fig5", "fig6"):
        assert not [d for d in validate(load(fig).map) if d.code == "DANGLING_REF"]


def test_association_subjects_sort_naturally():
    tm = TopicMap("urn:x:v")
    tm.add_topic(Topic("p", names=[Name("P")]))
    for _ in range(12):
        tm.add_association(Association((Member("p", ("p",)),)))
    subjects = [d.subject for d in validate(tm.seal())]
    assert subjects == [f"association:{i}" for i in range(1, 13)]
