import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gaussnm import OUKernel, QuadraticHamiltonian, WhiteKernel  # noqa: E402


@pytest.fixture
def free():
    return QuadraticHamiltonian.free_particle()


@pytest.fixture
def position_noise():
    return OUKernel(1.0, d_q=1.0, d_p=0.0)


@pytest.fixture
def momentum_noise():
    return OUKernel(1.0, d_q=0.0, d_p=1.0)


@pytest.fixture
def white_position():
    return WhiteKernel([[1.0, 0.0], [0.0, 0.0]])


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
