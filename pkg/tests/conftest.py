"""Collects ``criterion`` markers and prints one PASS/FAIL line per criterion."""
from collections import defaultdict

_OUTCOMES = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    num = props.get("criterion")
    if num is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES[num].append((report.nodeid.split("::")[-1], report.passed, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        checks = _OUTCOMES[num]
        failed = [name for name, ok, _ in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        tr.write_line(f"criterion {num}: {status} ({len(checks) - len(failed)}/{len(checks)} checks)"
                      + (f" failing: {', '.join(failed)}" if failed else ""))
        for name, ok, detail in checks:
            if detail:
                tr.write_line(f"    {name}: {detail}")
