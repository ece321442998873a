import pytest

from vaxadapt import GlueKernel, make_convex_test, make_example1, make_example2

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def kernel():
    return GlueKernel()


@pytest.fixture(scope="session")
def ex1(kernel):
    return make_example1(kernel)


@pytest.fixture(scope="session")
def ex1_raw(kernel):
    return make_example1(kernel, normalize=False)


@pytest.fixture(scope="session")
def ex2(kernel):
    return make_example2(kernel)


@pytest.fixture(scope="session")
def convex():
    return make_convex_test(0.8, 3)


@pytest.fixture(scope="session")
def curves(ex1, ex2, convex):
    return {"example1": ex1, "example2": ex2, "convex_test": convex}


@pytest.fixture
def report():
    """Record a one-line acceptance verdict, printed in the terminal summary."""

    def add(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
