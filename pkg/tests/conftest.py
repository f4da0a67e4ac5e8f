import pytest

from hypothesis import settings

settings.register_profile("ci", deadline=None, print_blob=True)
settings.load_profile("ci")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one status line per acceptance criterion."""

    def record(number: int, status: str, detail: str) -> None:
        line = f"C{number} {status}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)
