import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _RESULTS[number] = ("PASS" if rep.passed else "FAIL", item.name)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        verdict, name = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  ({name})")
