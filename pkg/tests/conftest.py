import numpy as np
import pytest

from fllr.hilbert import FunctionalSample


def random_sample(rng, n, d, y=None, spread=1.0):
    X = spread * rng.standard_normal((n, d))
    if y is None:
        y = rng.standard_normal(n)
    return FunctionalSample(X, np.asarray(y, dtype=float))


def covering_h(sample, x0, pad=1.01):
    """A bandwidth that puts every curve inside the ball."""
    return pad * float(np.max(np.linalg.norm(sample.inputs - x0, axis=1))) + 1e-12


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_point():
    """The asymmetric two-point design: X = {0.5, 0.25}, y = {1, 2}."""
    return FunctionalSample(np.array([[0.5], [0.25]]), np.array([1.0, 2.0]))


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary, then assert."""
    def record(number, name, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  [{detail}]"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
