import pytest

_RESULTS: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    cid, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    entry = _RESULTS.setdefault(cid, {"title": title, "passed": True, "detail": detail})
    entry["passed"] &= report.passed
    entry["detail"] = detail or entry["detail"]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        entry = _RESULTS[cid]
        status = "PASS" if entry["passed"] else "FAIL"
        line = f"criterion {cid:<3} {status}  {entry['title']}"
        if entry["detail"]:
            line += f"  [{entry['detail']}]"
        terminalreporter.write_line(line)
