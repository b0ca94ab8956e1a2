import pytest

# criterion number -> list of (passed, message), filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def record():
    def _record(criterion: int, passed: bool, message: str) -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((bool(passed), message))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        items = ACCEPTANCE[k]
        ok = all(p for p, _ in items)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k}")
        for p, msg in items:
            terminalreporter.write_line(f"      {'ok  ' if p else 'FAIL'}  {msg}")
