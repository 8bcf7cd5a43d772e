import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance_report():
    def record(name: str, passed: bool, detail: str) -> None:
        ACCEPTANCE[name] = (passed, detail)
        print(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
