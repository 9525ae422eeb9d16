from __future__ import annotations

import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""
    def report(number: int, name: str, ok: bool, elapsed: float, limit: float | None, detail: str = ""):
        timed = ok and (limit is None or elapsed < limit)
        limit_txt = f" (limit {limit:g}s)" if limit is not None else ""
        line = f"criterion {number:2d} {'PASS' if timed else 'FAIL'}  {name}: {detail}  [{elapsed:.2f}s{limit_txt}]"
        _CRITERIA.append(line)
        print(line)
        return timed
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
