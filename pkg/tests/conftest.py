import pytest

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one ``(criterion, ok, detail)`` line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, name: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} ({name}): {detail}"
        lines.append(line)
        print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split()[0])):
            terminalreporter.write_line(line)
