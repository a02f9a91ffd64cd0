"""Shared fixtures: the motivating-scenario trace and synthetic corpora."""

from __future__ import annotations

import hashlib

import pytest

from rewap.trace import ConcreteResource, VisitSnapshot, VisitTrace

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        _acceptance_outcomes[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_outcomes.items():
        terminalreporter.write_line(f"ACCEPTANCE {name}: {outcome.upper()}")

BASE_TIME = 1_600_000_000
VI = 1800

# Query string of d.jpg at each visit; the content behind them never changes.
DJPG_QUERIES = [892, 157, 184, 663, 912, 411, 508, 777, 345]


def content_hash(name: str, version: int = 0) -> str:
    return hashlib.md5(f"fixture|{name}|{version}".encode()).hexdigest()


def scenario_resources(visit: int) -> list[ConcreteResource]:
    """Resources of the motivating app at one visit.

    index.html has no explicit expiry (heuristic applies), b.js expires in
    five minutes, a.css in a day, the images in a year; the address service
    is no-store and changes content every visit; d.jpg rotates its query
    string while keeping the same content.
    """
    bg = ConcreteResource("http://m.foo.com/bg.png", content_hash("bg"), 50_000, 31_536_000)
    index = ConcreteResource("http://m.foo.com/index.html", content_hash("index"), 2_000, None)
    css = ConcreteResource("http://m.foo.com/a.css", content_hash("css"), 4_000, 86_400)
    js = ConcreteResource("http://m.foo.com/b.js", content_hash("js"), 3_000, 300)
    djpg = ConcreteResource(
        f"http://m.foo.com/d.jpg?{DJPG_QUERIES[visit]}", content_hash("d"), 30_000, 31_536_000
    )
    address = ConcreteResource(
        "http://m.foo.com/image/address", content_hash("addr", visit), 500, None, no_store=True
    )
    if visit == 0:
        # bg.png loads first on the cold visit, making it the oldest entry
        # once the cache fills up.
        return [bg, index, css, js, djpg, address]
    return [index, css, js, djpg, bg, address]


@pytest.fixture
def scenario_trace() -> VisitTrace:
    snapshots = tuple(
        VisitSnapshot(BASE_TIME + i * VI, tuple(scenario_resources(i))) for i in range(9)
    )
    return VisitTrace("foo", VI, snapshots)
