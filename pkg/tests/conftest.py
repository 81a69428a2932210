from __future__ import annotations

import pytest

# criterion number -> list of (part, passed, detail), filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture
def record_criterion():
    def record(number: int, part: str, passed: bool, detail: str) -> None:
        ACCEPTANCE.setdefault(number, []).append((part, bool(passed), detail))
        print(f"criterion {number} [{part}] {'PASS' if passed else 'FAIL'}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {d}" for name, _, d in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:2d} | {detail}")
