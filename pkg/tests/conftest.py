import pytest

_LINES = []


class Criterion:
    """Collects sub-checks for one acceptance criterion and prints one line."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.checks = []

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def passed(self):
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def line(self):
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.checks if not ok]
        status = "PASS" if self.passed else "FAIL"
        tail = f": failed {'; '.join(failed)}" if failed else ""
        return f"criterion {self.number} [{status}] {self.title}{tail}"

    def finish(self):
        _LINES.append(self.line())
        assert self.passed, self.line()


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
