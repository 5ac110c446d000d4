"""Prints one pass/fail verdict line per acceptance criterion after the
run, keyed by each acceptance test's docstring."""

_acceptance_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        prior = _acceptance_results.get(report.nodeid)
        _acceptance_results[report.nodeid] = \
            (prior or report.passed) and report.passed


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance.py" in item.nodeid and item.function.__doc__:
            name = " ".join(item.function.__doc__.split())
            item.user_properties.append(("criterion", name))
            _criterion_names[item.nodeid] = name


_criterion_names = {}


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, passed in _acceptance_results.items():
        name = _criterion_names.get(nodeid, nodeid)
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {name}")
