import pytest

RESULTS = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def add(number: int, ok: bool, text: str):
        RESULTS.append((number, ok, text))
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")

    return add


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance")
    for number, ok, text in sorted(RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")
