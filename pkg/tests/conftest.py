import pytest


def pytest_configure(config):
    config._acceptance = {}


@pytest.fixture
def acceptance(request):
    """record(number, ok, detail): one summary line per acceptance criterion."""
    store = request.config._acceptance

    def record(number: int, ok: bool, detail: str) -> None:
        store[number] = (ok, detail)
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter, config):
    store = getattr(config, "_acceptance", {})
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(store):
        ok, detail = store[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
