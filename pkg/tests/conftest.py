import contextlib

import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def record(number, title):
        try:
            yield
        except BaseException as exc:
            line = f"criterion {number} ({title}): FAIL  {type(exc).__name__}: {exc}"
            _ACCEPTANCE[number] = line
            print(line)
            raise
        line = f"criterion {number} ({title}): PASS"
        _ACCEPTANCE[number] = line
        print(line)

    return record


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("BETTI_CACHE", str(tmp_path / "cache"))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
