import pytest

# criterion number -> (title, passed, detail), filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def record():
    def _record(n: int, title: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[n] = (title, bool(passed), detail)
        print(f"ACCEPTANCE {n} {title}: {'PASS' if passed else 'FAIL'} ({detail})")
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"ACCEPTANCE {n} {title}: {'PASS' if passed else 'FAIL'} ({detail})")
