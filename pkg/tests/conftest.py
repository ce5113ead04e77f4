import pytest

from coherent_kit.grid import PhysicalConstants, make_grid

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def constants():
    return PhysicalConstants()


@pytest.fixture(scope="session")
def grid():
    return make_grid(1024, -20, 20)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
