"""Collects one pass/fail line per acceptance criterion and prints them at the end."""

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        measured = "; ".join(str(v) for k, v in report.user_properties if k == "measured")
        _ACCEPTANCE[report.nodeid.split("::")[-1]] = (report.outcome.upper(), measured)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome, measured = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{name}: {outcome}  {measured}")
