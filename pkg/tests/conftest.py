import numpy as np
import pytest

from nearignorance.channels import IdentityChannel, binary_test_channel
from nearignorance.core import ManifestDataset


@pytest.fixture
def diag_test():
    return binary_test_channel(0.1, 0.1)


@pytest.fixture
def ident2():
    return IdentityChannel(2)


@pytest.fixture
def all_positive_20():
    return ManifestDataset.discrete([0] * 20)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
