import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from optomech_transfer import PRESETS  # noqa: E402


@pytest.fixture
def green():
    return PRESETS["electro_palomaki"]


@pytest.fixture
def blue():
    return PRESETS["electro_ockeloen"]


@pytest.fixture
def opto50():
    return PRESETS["opto_riedinger_eta50"]


# --- acceptance report ----------------------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    number = marker.args[0]
    detail = dict(item.user_properties).get("detail", "")
    if report.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else "error"
    previous = _CRITERIA.get(number, (True, ""))
    _CRITERIA[number] = (previous[0] and report.passed, detail or previous[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
