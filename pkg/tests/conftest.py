from __future__ import annotations

from collections import OrderedDict
from pathlib import Path

import pytest

from topicmaps import Name, Topic, TopicMap, load_file

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def load():
    def _load(name):
        return load_file(CORPUS / f"{name}.xtm")

    return _load


@pytest.fixture
def faculty():
    return load_file(CORPUS / "faculty-full.xtm").map


def make_tirupathi() -> TopicMap:
    tm = TopicMap("urn:x:tirupathi")
    tm.add_topic(Topic("city", names=[Name("City")]))
    tm.add_topic(Topic("person", names=[Name("Person")]))
    tm.add_topic(Topic("tirupathi-city", types={"city"}, names=[Name("Tirupathi")]))
    tm.add_topic(Topic("tirupathi-person", types={"person"}, names=[Name("Tirupathi")]))
    return tm.seal()


@pytest.fixture
def tirupathi():
    return make_tirupathi()


# -- acceptance summary --------------------------------------------------------

_criteria: "OrderedDict[str, dict]" = OrderedDict()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    code, title = marker.args
    entry = _criteria.setdefault(code, {"title": title, "ok": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for code in sorted(_criteria, key=lambda c: int(c[2:])):
        e = _criteria[code]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"{code} {status}  {e['title']}  [{e['tests']} tests]")
