import pytest

from leobuf import GilbertElliottParams, PoissonArrivalParams


@pytest.fixture
def ref_arr():
    return PoissonArrivalParams(10.0)


@pytest.fixture
def ref_ch():
    return GilbertElliottParams(0.7, 0.3, 16)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def report():
    """Record one summary line per acceptance criterion."""

    def emit(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
