import pytest

_DETAILS: dict[int, str] = {}
_OUTCOMES: dict[int, str] = {}
_TITLES: dict[int, str] = {}


def _criterion(item):
    mark = item.get_closest_marker("criterion")
    return (mark.args[0], mark.args[1]) if mark else None


def pytest_collection_modifyitems(items):
    for item in items:
        c = _criterion(item)
        if c:
            _TITLES[c[0]] = c[1]


@pytest.fixture
def report(request):
    """Attach a one-line measurement to the criterion summary."""
    num, _ = _criterion(request.node)

    def put(text):
        _DETAILS[num] = text
    return put


def pytest_runtest_makereport(item, call):
    c = _criterion(item)
    if c is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _OUTCOMES[c[0]] = "FAIL" if call.excinfo is not None else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        detail = _DETAILS.get(num, "")
        tr.write_line(f"criterion {num} [{_OUTCOMES[num]}] {_TITLES[num]}" + (f": {detail}" if detail else ""))
