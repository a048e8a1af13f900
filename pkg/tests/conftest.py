import pytest

from koornwalk import kernels

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


needs_compiled = pytest.mark.skipif(kernels._compiled is None, reason="compiled kernels not available")
