import pytest

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = getattr(item, "criterion_detail", "")
    if rep.failed:
        msg = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
        detail = "; ".join(v for v in (detail, msg) if v)
    _CRITERIA[number] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"CRITERION {n:2d} {status}: {title}" + (f" ({detail})" if detail else ""))


@pytest.fixture
def detail(request):
    """Attach a short measured-value summary to the criterion line."""

    def set_detail(text: str) -> None:
        request.node.criterion_detail = text

    return set_detail
