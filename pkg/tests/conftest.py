import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


def pytest_collection_modifyitems(config, items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            n, title = m.args
            _CRITERIA.setdefault(n, {"title": title, "outcome": "not run", "detail": ""})
            item.user_properties.append(("criterion", n))


def pytest_runtest_logreport(report):
    n = dict(report.user_properties).get("criterion")
    if n is None:
        return
    entry = _CRITERIA[n]
    detail = dict(report.user_properties).get("measured")
    if detail:
        entry["detail"] = detail
    if entry["outcome"] == "FAIL":
        return  # one failing case fails the criterion
    if report.when == "call" or report.outcome != "passed":
        if report.failed:
            entry["outcome"] = "FAIL"
        elif report.skipped:
            entry["outcome"] = "skipped"
        elif report.when == "call":
            entry["outcome"] = "pass"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        line = f"criterion {n:>2}  {e['outcome']:<8} {e['title']}"
        if e["detail"]:
            line += f"  [{e['detail']}]"
        terminalreporter.write_line(line)


@pytest.fixture
def measured(record_property):
    """Attach a one-line measurement to the acceptance summary."""

    def put(text):
        record_property("measured", text)

    return put
