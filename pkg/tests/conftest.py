"""Shared fixtures, and the one-line-per-criterion acceptance summary."""

from __future__ import annotations

import pytest

from av2 import catalog, thurston

_criteria: dict[int, dict] = {}


@pytest.fixture(scope="session")
def solved_catalog():
    """solve() with the default start on every realizable portrait."""
    return {P.name: (P, thurston.solve(P)) for P in catalog.realizable()}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "ran": False, "notes": []})
    if report.when == "call" or report.failed:
        entry["ran"] = True
        entry["ok"] &= report.passed
        entry["notes"] += [v for k, v in report.user_properties if k == "detail"]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        tr.write_line(f"{status} criterion {n:2d}: {e['title']}")
        for note in e["notes"]:
            tr.write_line(f"      {note}")
