import contextlib

import pytest

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion as PASS/FAIL."""
    results = request.config.stash[_RESULTS]

    @contextlib.contextmanager
    def record(number, title):
        info = {}
        try:
            yield info
        except BaseException as exc:
            results.append((number, title, False, info.get("detail", repr(exc)[:120])))
            raise
        results.append((number, title, True, info.get("detail", "")))

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(results, key=lambda r: r[0]):
        line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
