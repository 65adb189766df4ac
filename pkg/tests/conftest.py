import pytest

VERDICTS = []


def record(tag, title, ok, detail=""):
    """Print one verdict line now and repeat it in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} {tag} {title}" + (f": {detail}" if detail else "")
    VERDICTS.append(line)
    print(line)
    return ok


@pytest.fixture
def verdict():
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
