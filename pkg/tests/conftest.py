import numpy as np
import pytest

from contrast_subgraph.goqc import GoqcInstance
from contrast_subgraph.summarize import build_difference, build_summary
from contrast_subgraph.synth import f2_index, fixture_f2


def lab(*vertices):
    """Fixture vertex labels (1-based) to 0-based ids."""
    return f2_index(vertices)


@pytest.fixture(scope="session")
def f2():
    return fixture_f2()


@pytest.fixture(scope="session")
def f2_diff(f2):
    a, b = f2
    return build_difference(build_summary(a), build_summary(b)).d


def f2_instance(kind, alpha):
    a, b = fixture_f2()
    d = build_difference(build_summary(a), build_summary(b)).d
    w = {"A-B": d, "B-A": -d, "abs": np.abs(d)}[kind]
    return GoqcInstance(w, alpha)


def random_instance(seed, n=12):
    rng = np.random.default_rng(seed)
    w = np.triu(rng.uniform(-1, 1, (n, n)), 1)
    return GoqcInstance(w + w.T, 0.0)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.LINES:
            terminalreporter.write_line(line)
