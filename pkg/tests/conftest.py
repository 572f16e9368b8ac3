import pytest

from qdphonons import _kernels, load_catalog, load_reference

ALL_BACKENDS = sorted(_kernels.BACKENDS)

# lines collected by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def no_dbr():
    return load_catalog("no_dbr")


@pytest.fixture(scope="session")
def with_dbr():
    return load_catalog("with_dbr")


@pytest.fixture(scope="session")
def ref_no_dbr():
    return load_reference("no_dbr")


@pytest.fixture(scope="session")
def ref_with_dbr():
    return load_reference("with_dbr")


@pytest.fixture(params=ALL_BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
