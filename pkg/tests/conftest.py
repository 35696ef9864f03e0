import pytest

_LINES: dict[int, list] = {}


@pytest.fixture
def record():
    """Record one part of an acceptance criterion: ``record(n, ok, detail)``."""

    def _record(n: int, ok: bool, detail: str) -> None:
        _LINES.setdefault(n, []).append((bool(ok), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        parts = _LINES[n]
        ok = all(p[0] for p in parts)
        detail = "; ".join(p[1] for p in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
