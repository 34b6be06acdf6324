import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", help="skip multi-minute reproduction runs")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip = pytest.mark.skip(reason="--skip-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and not rep.passed):
        return
    detail = dict(item.user_properties).get("detail", "")
    status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
    item.config._criteria[(mark.args[0], item.name)] = (status, detail)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), (status, detail) in sorted(results.items()):
        terminalreporter.write_line(f"criterion {n:>2} {status}  {name}  {detail}")
