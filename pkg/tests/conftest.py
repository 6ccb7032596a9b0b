import numpy as np
import pytest

from histq.decoherence import Propagator, QuantumState
from histq.histories import HistorySpec
from histq.sampling import haar_unitary, random_density

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PPLUS = np.full((2, 2), 0.5, dtype=complex)
PMINUS = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def random_system(rng, d, n):
    spec = HistorySpec.uniform(d, n)
    state = QuantumState(random_density(rng, d))
    prop = Propagator(spec, [haar_unitary(rng, d) for _ in range(n)])
    return spec, state, prop


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
