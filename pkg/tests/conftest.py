import numpy as np
import pytest

from scanthz.bsbl import kernels


@pytest.fixture(params=kernels.available())
def backend(request):
    prev = kernels.use(request.param)
    yield request.param
    kernels.use(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def block_sparse(rng, n, cols, d, blocks):
    """``n x cols`` complex image with ``blocks`` random active row blocks of size ``d``."""
    x = np.zeros((n, cols), dtype=np.complex128)
    for b in rng.choice(n // d, blocks, replace=False):
        x[b * d : (b + 1) * d] = crandn(rng, d, cols)
    return x


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
