import sys

import pytest

from liquidskin.circuit import AdmittanceSystem, MaterialParams
from liquidskin.files import default_network
from liquidskin.stimulus import PerturbCoeffs


@pytest.fixture(scope="session")
def network():
    return default_network()


@pytest.fixture(scope="session")
def material():
    return MaterialParams()


@pytest.fixture(scope="session")
def coeffs():
    return PerturbCoeffs()


@pytest.fixture(scope="session")
def system(network, material):
    return AdmittanceSystem.from_network(network, material)


@pytest.fixture(scope="session")
def pair():
    return ("BL", "C")


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines past pytest's output capture."""
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not getattr(acceptance, "VERDICTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.VERDICTS:
        terminalreporter.write_line(line)
