import numpy as np
import pytest

from ppi_fewlabel.samplestats import LabelledSample


def definitional_cov(xs, ys):
    """Covariance by explicit loop; independent of the library's summation."""
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / (n - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def binary_sample(rng, n, p=(0.45, 0.05, 0.05, 0.45)):
    cells = rng.choice(4, size=n, p=p)
    h = (cells <= 1).astype(float)
    f = ((cells == 0) | (cells == 2)).astype(float)
    return LabelledSample(f, h)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
