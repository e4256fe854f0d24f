import dataclasses

import numpy as np
import pytest
from scipy import stats

from src.model.channel import capture_prob, connection_prob, link_outage
from src.model.errors import DomainError
from src.model.params import SfParams
from src.verification.mcsim import (
    TrialConfig, sample_disk_radii, simulate_capture, simulate_connection, simulate_link_outage,
)

TRIALS = 200_000


def test_disk_radii_distribution():
    radii = sample_disk_radii(np.random.default_rng(1), 50_000, 200.0)
    assert radii.max() <= 200.0
    assert stats.kstest(radii, lambda x: (np.clip(x, 0, 200.0) / 200.0) ** 2).pvalue > 1e-3


def test_connection_matches_closed_form(scenario):
    estimate = simulate_connection(TrialConfig(scenario, 12, 200.0, 1, TRIALS, 5))
    assert estimate.within(connection_prob(scenario, 12, 200.0), sigmas=4)


def test_connection_is_certain_without_threshold(scenario):
    lenient = dataclasses.replace(scenario, sf_table=(SfParams(7, 41.22e-3, -200.0, 12.29e-3, 1.28e-3),))
    assert simulate_connection(TrialConfig(lenient, 7, 200.0, 1, 10_000, 5)).estimate == 1.0


@pytest.mark.parametrize("d1, copies", [(200.0, 1), (100.0, 4)])
def test_capture_matches_closed_form(scenario, d1, copies):
    loaded = scenario.with_devices(7, 500.0)
    estimate = simulate_capture(TrialConfig(loaded, 7, d1, copies, TRIALS, 9))
    assert estimate.within(capture_prob(loaded, 7, d1, copies), sigmas=4)


def test_capture_is_certain_without_interferers(scenario):
    assert simulate_capture(TrialConfig(scenario, 7, 200.0, 3, 10_000, 1)).estimate == 1.0


def test_capture_with_vanishing_threshold(scenario):
    loaded = dataclasses.replace(scenario.with_devices(7, 200.0), theta_linear=True, sir_threshold_db=1e-9)
    assert simulate_capture(TrialConfig(loaded, 7, 200.0, 1, 10_000, 1)).estimate >= 0.9999


def test_link_outage_matches_closed_form(scenario):
    loaded = scenario.with_devices(7, 1000.0)
    estimate = simulate_link_outage(TrialConfig(loaded, 7, 200.0, 2, TRIALS, 21))
    assert estimate.within(link_outage(loaded, 7, 200.0, 2).link_outage, sigmas=4)


def test_results_do_not_depend_on_threads(loaded_scenario):
    cfg = TrialConfig(loaded_scenario, 7, 150.0, 2, 150_000, 77)
    assert simulate_capture(cfg, threads=1) == simulate_capture(cfg, threads=3)


@pytest.mark.parametrize("changes", [{"trials": 0}, {"d1": 0.0}, {"d1": 201.0}, {"copies": 0}, {"sf": 6},
                                     {"seed": -1}])
def test_trial_config_validation(scenario, changes):
    arguments = {"scenario": scenario, "sf": 7, "d1": 100.0, "copies": 1, "trials": 10, "seed": 1}
    arguments.update(changes)
    with pytest.raises(DomainError):
        TrialConfig(**arguments)
