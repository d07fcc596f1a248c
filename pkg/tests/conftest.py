"""Collects the acceptance verdicts and prints one line per criterion."""

import pytest

_verdicts: dict[int, tuple[bool, str]] = {}
_collected: set[int] = set()


@pytest.fixture
def verdict(request):
    """``verdict(n, ok, detail)`` records the outcome of acceptance criterion ``n``."""

    def record(n: int, ok: bool, detail: str) -> None:
        _verdicts[n] = (bool(ok), detail)

    return record


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        _collected.add(mark.args[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _collected:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_collected):
        ok, detail = _verdicts.get(n, (False, "did not complete"))
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
