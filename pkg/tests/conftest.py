import numpy as np
import pytest

from ssrlsc import _backend
from ssrlsc.datamodel import SampleSet


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line_samples():
    """1-D points {0, 1} in class 1 and {10, 11} in class 2."""
    return SampleSet([[0.0], [1.0], [10.0], [11.0]], [1, 1, 2, 2], [[0, 0], [0, 1], [0, 2], [0, 3]])


def random_samples(rng, n, dim, classes, height=None, width=None):
    labels = np.arange(n) % classes + 1
    height = height or n
    width = width or 1
    flat = rng.choice(height * width, size=n, replace=False)
    pos = np.column_stack([flat // width, flat % width])
    return SampleSet(rng.normal(size=(n, dim)), labels, pos)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
