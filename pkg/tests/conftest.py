import numpy as np
import pytest

from seclossless import Alphabet, Channel, compose_markov, load_fixture, make_source


def binary_entropy(p):
    # independent closed form used as an oracle
    if p in (0, 1):
        return 0.0
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def flip(a, b):
    """Crossover of two cascaded binary flips."""
    return a * (1 - b) + b * (1 - a)


def random_binary_source(seed):
    """Random P(x,y,z) with E drawn from Y, all binary."""
    rng = np.random.default_rng(seed)
    pxyz = make_source({"X": 2, "Y": 2, "Z": 2}, rng.dirichlet(np.ones(8)))
    e = Channel((Alphabet("Y", 2),), Alphabet("E", 2), rng.dirichlet(np.ones(2), size=2))
    return compose_markov(pxyz, e)


@pytest.fixture(scope="session")
def dsbs():
    return load_fixture("dsbs")


@pytest.fixture(scope="session")
def x_eq_y():
    return load_fixture("x_eq_y")


@pytest.fixture(scope="session")
def no_eve():
    return load_fixture("no_eve")


@pytest.fixture(scope="session")
def y_const():
    return load_fixture("y_const")


# one line per acceptance criterion, shown after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
