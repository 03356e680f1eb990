import io
import shutil
import subprocess
import sys

import pytest

from topicmaps import load_file, merge_maps, parse_xtm, validate
from topicmaps.cli import run
from topicmaps.merge import deduplicate

from conftest import CORPUS


def tmctl(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def work(tmp_path):
    for f in CORPUS.glob("*.xtm"):
        shutil.copy(f, tmp_path / f.name)
    return tmp_path


GOLDEN = {
    ("validate", "fig4.xtm"): (0, (
        "WARNING ID_FRAGMENT 4:3: topic id '#NCAKM10-paper' carries a leading '#'; stripped\n"
        "WARNING IMPLICIT_TOPIC topic:journal: created implicitly for an undeclared reference\n"
        "WARNING IMPLICIT_TOPIC topic:pdf-format: created implicitly for an undeclared reference\n"
        "INFO TOPIC_WITHOUT_NAME topic:journal: topic has no base name\n"
        "INFO TOPIC_WITHOUT_NAME topic:pdf-format: topic has no base name\n"
    )),
    ("validate", "faculty-full.xtm"): (0, ""),
    ("query", "-m", "faculty-full.xtm", 'name("Tirupathi") and type(city)'): (0, "tirupathi-city\tTirupathi\n"),
    ("query", "-m", "faculty-full.xtm", 'name("Tirupathi")'): (0, (
        "tirupathi-city\tTirupathi\n"
        "tirupathi-person\tTirupathi\n"
    )),
    ("query", "-m", "faculty-full.xtm", "id(rajkumar-kannan) -> assoc(works-for)"): (0, "university\tUniversity\n"),
    ("query", "-m", "faculty-full.xtm", 'name("Dr Rajkumar Kannan")', "--context", "university"): (
        0, "rajkumar-kannan\tDr Rajkumar Kannan\n"),
    ("query", "-m", "faculty-full.xtm", 'name("Dr Rajkumar Kannan")', "--context", ""): (0, ""),
    ("search", "-m", "faculty-full.xtm", "knowledge management", "--type", "journal"): (0, (
        "RANK  SCORE  TOPIC          NAME                                            OCCURRENCES\n"
        "1     1.000  NCAKM10-paper  Advances in Knowledge Management special Issue  1\n"
    )),
    ("search", "-m", "faculty-full.xtm", "rajkumar"): (0, (
        "RANK  SCORE  TOPIC            NAME             OCCURRENCES\n"
        "1     1.000  rajkumar-kannan  Rajkumar Kannan  1\n"
    )),
    ("stats", "-m", "fig4.xtm"): (0, (
        "topics: 3\nassociations: 0\noccurrences: 1\n"
        "index terms: 6\nindex postings: 6\nindex topics covered: 1\n"
    )),
    ("export", "-m", "fig3.xtm", "--format", "xtm"): (0, (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<topicMap xmlns="http://www.topicmaps.org/xtm/1.0/" xmlns:xlink="http://www.w3.org/1999/xlink">\n'
        '  <topic id="rajkumar-kannan">\n'
        '    <baseName>\n'
        '      <scope>\n'
        '        <topicRef xlink:href="#university"/>\n'
        '      </scope>\n'
        '      <baseNameString>Dr Rajkumar Kannan</baseNameString>\n'
        '    </baseName>\n'
        '  </topic>\n'
        '  <topic id="university"/>\n'
        '</topicMap>\n'
    )),
    ("export", "-m", "fig3.xtm", "--format", "json"): (0, """{
  "base_locator": "{BASE}fig3.xtm",
  "topics": [
    {
      "id": "rajkumar-kannan",
      "implicit": false,
      "subject_identifiers": [],
      "types": [],
      "names": [
        {
          "value": "Dr Rajkumar Kannan",
          "scope": [
            "university"
          ]
        }
      ],
      "occurrences": []
    },
    {
      "id": "university",
      "implicit": true,
      "subject_identifiers": [],
      "types": [],
      "names": [],
      "occurrences": []
    }
  ],
  "associations": []
}
"""),
}


def _resolve(work, argv):
    return [str(work / a) if a.endswith(".xtm") else a for a in argv]


@pytest.mark.parametrize("argv", list(GOLDEN), ids=lambda a: " ".join(a)[:60])
def test_golden(work, argv):
    code, expected = GOLDEN[argv]
    expected = expected.replace("{BASE}", work.resolve().as_uri() + "/")
    got = tmctl(*_resolve(work, argv))
    assert got[0] == code
    assert got[1] == expected
    assert tmctl(*_resolve(work, argv))[1] == got[1]


@pytest.mark.parametrize("argv, code", [
    ([], 2),
    (["bogus"], 2),
    (["stats"], 2),
    (["stats", "-m", "fig4.xtm", "--frob"], 2),
    (["search", "-m", "fig4.xtm", "x", "--limit", "0"], 2),
    (["query", "-m", "fig4.xtm", "name("], 2),
    (["stats", "-m", "missing.xtm"], 3),
    (["validate", "broken.xtm"], 1),
    (["validate", "dangling.xtm"], 1),
])
def test_exit_codes(work, argv, code):
    (work / "broken.xtm").write_text("<topicMap><topic id='a'>")
    (work / "dangling.xtm").write_text(
        '<topicMap xmlns="http://www.topicmaps.org/xtm/1.0/"><topic/></topicMap>')
    got, out, err = tmctl(*_resolve(work, argv))
    assert got == code
    if code == 2 and argv[:1] != ["query"]:
        assert err.startswith("usage: ")
    if code == 3:
        assert "cannot read" in err


def test_broken_reports_on_stdout(work):
    (work / "broken.xtm").write_text("<topicMap><topic id='a'>")
    code, out, _ = tmctl("validate", work / "broken.xtm")
    assert code == 1 and out.startswith("ERROR MALFORMED_XML ")


def test_merge_self_then_stats(work):
    a = work / "faculty-full.xtm"
    code, report, err = tmctl("merge", a, a, "-o", work / "out.xtm")
    assert code == 0
    stats = tmctl("stats", "-m", work / "out.xtm")[1]
    dedup, _ = deduplicate(load_file(a).map)
    assert stats.startswith(
        f"topics: {dedup.topic_count}\nassociations: {len(dedup.associations)}\n"
        f"occurrences: {dedup.occurrence_count()}\n"
    )
    merged = report.splitlines()
    assert len(merged) == 14 and all(line.endswith("[source-locator]") for line in merged)
    assert err.count("info: renamed colliding id ") == 14


def test_merge_report_file(work):
    code, out, err = tmctl("merge", work / "fig2.xtm", work / "fig3.xtm", "-o", work / "m.xtm",
                           "--report", work / "r.txt")
    assert code == 0 and out == ""
    # different base locators and no shared identity: the colliding id is only renamed
    assert (work / "r.txt").read_text() == ""
    assert err == "info: renamed colliding id rajkumar-kannan -> rajkumar-kannan~2\n"
    merged = load_file(work / "m.xtm").map
    assert not [d for d in validate(merged) if d.severity == "error"]


@pytest.mark.parametrize("fig", ["fig2", "fig3", "fig4", "fig5", "fig6", "faculty-full"])
def test_export_roundtrip(work, fig):
    code, text, _ = tmctl("export", "-m", work / f"{fig}.xtm", "--format", "xtm")
    assert code == 0
    again = parse_xtm(text.encode(), "urn:x:rt")
    assert not [d for d in again.diagnostics if d.severity == "error"]
    assert not [d for d in validate(again.map) if d.severity == "error"]
    (work / "re.xtm").write_text(text)
    assert tmctl("export", "-m", work / "re.xtm", "--format", "xtm")[1] == text


def test_console_script(work):
    exe = shutil.which("tmctl")
    cmd = [exe] if exe else [sys.executable, "-m", "topicmaps"]
    p = subprocess.run([*cmd, "stats", "-m", str(work / "fig4.xtm")], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.startswith("topics: 3\n")


def test_validate_does_not_repeat_parser_warnings(work):
    (work / "es.xtm").write_text(
        '<topicMap xmlns="http://www.topicmaps.org/xtm/1.0/" xmlns:xlink="http://www.w3.org/1999/xlink">'
        '<topic id="a"><baseName><scope/><baseNameString>A</baseNameString></baseName></topic></topicMap>')
    code, out, _ = tmctl("validate", work / "es.xtm")
    assert code == 0
    assert out == ("WARNING EMPTY_SCOPE_ELEMENT scope:line 1:/topicMap[1]/topic[1]/baseName[1]/scope[1]: "
                   "scope element lists no themes\n")
