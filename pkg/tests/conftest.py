import numpy as np
import pytest
from hypothesis import settings

from phaseconj import _backend

settings.register_profile("phaseconj", max_examples=60, deadline=None)
settings.load_profile("phaseconj")

# criterion number -> (title, all calls passed so far)
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, [title, True])
    if rep.failed or (rep.when == "call" and not rep.passed):
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
