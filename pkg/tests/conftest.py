"""Collects one PASS/FAIL line per acceptance criterion and prints them at the end of the run."""
import pytest

_LINES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def _line(number, title, ok, detail=""):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
    return line + (f"  [{detail}]" if detail else "")


@pytest.fixture
def criterion(request):
    """record(ok, detail) for the test's criterion marker; a test that dies first is a FAIL."""
    number, title = request.node.get_closest_marker("criterion").args

    def record(ok: bool, detail: str = "") -> bool:
        _LINES[number] = _line(number, title, ok, detail)
        print(_LINES[number])
        return ok

    yield record
    if number not in _LINES:
        _LINES[number] = _line(number, title, False, "did not complete")


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
