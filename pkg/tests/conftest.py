import pytest
from hypothesis import HealthCheck, settings

from tropmirror import batyrev

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def quintic_faces():
    """B = boundary of the quintic nabla, decomposed into its faces."""
    return batyrev.build_B(batyrev.quintic_input(triangulated=False))


@pytest.fixture(scope="session")
def quintic_b():
    """B over the bundled maximal triangulation, extended across facets."""
    return batyrev.build_B(batyrev.quintic_input(triangulated=True), extend_across_facets=True)


@pytest.fixture(scope="session")
def quartic_b():
    return batyrev.build_B(batyrev.quartic_input(triangulated=True))


@pytest.fixture(scope="session")
def quartic_faces():
    return batyrev.build_B(batyrev.quartic_input(triangulated=False))


# acceptance bookkeeping: one summary line per criterion

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit): acceptance criterion with a time limit in seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    number, title, limit = mark.args
    _ACCEPTANCE[number] = (title, limit, report.passed, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, limit, passed, duration = _ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number:2d}. {title} ({duration:.2f}s, limit {limit}s)")
