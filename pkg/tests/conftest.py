from . import _acceptance_log as log


def pytest_collection_modifyitems(config, items):
    # acceptance runs last so it can reuse the property suite outcomes
    items.sort(key=lambda it: it.nodeid.split("::")[0].endswith("test_acceptance.py"))


def pytest_runtest_logreport(report):
    if "test_properties.py" in report.nodeid and report.when == "call":
        log.PROPERTY_OUTCOMES[report.nodeid] = report.passed
    elif "test_properties.py" in report.nodeid and report.failed:
        log.PROPERTY_OUTCOMES[report.nodeid] = False


def pytest_terminal_summary(terminalreporter):
    if not log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log.RESULTS):
        terminalreporter.write_line(log.line(n))
