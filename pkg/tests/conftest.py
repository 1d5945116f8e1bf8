import pytest

from wordsat.catalog import alternating, by_name, symmetric

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def A5():
    return alternating(5)


@pytest.fixture(scope="session")
def S4():
    return symmetric(4)


@pytest.fixture(scope="session")
def A5xC2():
    return by_name("A5xC2")


@pytest.fixture(scope="session")
def a5_solvable_report(A5):
    from wordsat.synthesis import synth_solvable_word
    return synth_solvable_word(A5, 2)


@pytest.fixture(scope="session")
def a5_auts(A5):
    from wordsat.structure import automorphism_group
    return automorphism_group(A5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
