import pytest

from src.model.params import NetworkScenario


@pytest.fixture
def scenario() -> NetworkScenario:
    """Built-in default deployment: R = 200 m, eta = 3.51, theta = 1 dB, P = 600 s."""
    return NetworkScenario()


@pytest.fixture
def loaded_scenario(scenario) -> NetworkScenario:
    """Default deployment with 100 SF7 devices on average."""
    return scenario.with_devices(7, 100.0)
