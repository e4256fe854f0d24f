"""
Monte Carlo counterpart of the channel model: Rayleigh-faded desired link, a
Poisson number of same-SF interferers placed uniformly on the disk, and the SNR
and SIR tests drawn independently per trial.
"""
from dataclasses import dataclass

import numpy as np

from src import config
from src.logger.logger import MyLogger
from src.model.channel import interferer_load, noise_power_dbm, path_gain
from src.model.errors import DomainError
from src.model.params import NetworkScenario, db_to_linear
from src.verification.streams import (
    STREAM_CAPTURE, STREAM_CONNECTION, STREAM_LINK, BernoulliEstimate, check_seed, count_successes,
)

logger = MyLogger(config.LOG_NAME)


@dataclass(frozen=True)
class TrialConfig:
    scenario: NetworkScenario
    sf: int
    d1: float
    copies: int
    trials: int
    seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be at least 1, got {self.trials}")
        if not 0 < self.d1 <= self.scenario.radius_m:
            raise DomainError(f"d1 must lie in (0, {self.scenario.radius_m}] m, got {self.d1}")
        if self.copies < 1:
            raise DomainError(f"copies must be at least 1, got {self.copies}")
        self.scenario.sf_params(self.sf)
        check_seed(self.seed)


def sample_disk_radii(rng: np.random.Generator, size: int, radius: float) -> np.ndarray:
    """Distances to the centre of points uniform on a disk, R * sqrt(U)."""
    return radius * np.sqrt(rng.random(size))


def _connection_successes(rng: np.random.Generator, size: int, cfg: TrialConfig) -> np.ndarray:
    scenario = cfg.scenario
    received_w = scenario.tx_power_w * path_gain(scenario, cfg.d1) * rng.exponential(1.0, size)
    noise_w = db_to_linear(noise_power_dbm(scenario) - 30.0)
    return received_w / noise_w >= scenario.sf_params(cfg.sf).snr_threshold_linear


def _capture_successes(rng: np.random.Generator, size: int, cfg: TrialConfig) -> np.ndarray:
    scenario = cfg.scenario
    load = interferer_load(scenario, cfg.sf, cfg.copies)
    counts = rng.poisson(load, size)
    total = int(counts.sum())
    radii = sample_disk_radii(rng, total, scenario.radius_m)
    fades = rng.exponential(1.0, total)
    desired = rng.exponential(1.0, size)

    owners = np.repeat(np.arange(size), counts)
    with np.errstate(divide="ignore"):
        relative_power = fades * (cfg.d1 / radii) ** scenario.ploss_exponent
    interference = np.bincount(owners, weights=relative_power, minlength=size)
    return desired > scenario.sir_threshold_linear * interference


def simulate_connection(cfg: TrialConfig, threads: int = 1) -> BernoulliEstimate:
    """Fraction of trials where the faded SNR reaches the SF's threshold (estimates H1)."""
    ACTION = f"Simulate connection SF{cfg.sf} d1={cfg.d1} ({cfg.trials} trials)"
    logger.start(ACTION)
    try:
        successes = count_successes(
            cfg.trials, cfg.seed, STREAM_CONNECTION,
            lambda rng, size: np.count_nonzero(_connection_successes(rng, size, cfg)), threads,
        )
        return BernoulliEstimate.from_counts(successes, cfg.trials, cfg.seed)
    finally:
        logger.close(ACTION)


def simulate_capture(cfg: TrialConfig, threads: int = 1) -> BernoulliEstimate:
    """
    Fraction of trials where the desired signal beats theta times the summed
    interference (estimates Q1,M). Interferers are Poisson with mean 2 N_j M p_j.
    """
    ACTION = f"Simulate capture SF{cfg.sf} d1={cfg.d1} M={cfg.copies} ({cfg.trials} trials)"
    logger.start(ACTION)
    try:
        successes = count_successes(
            cfg.trials, cfg.seed, STREAM_CAPTURE,
            lambda rng, size: np.count_nonzero(_capture_successes(rng, size, cfg)), threads,
        )
        return BernoulliEstimate.from_counts(successes, cfg.trials, cfg.seed)
    finally:
        logger.close(ACTION)


def simulate_link_outage(cfg: TrialConfig, threads: int = 1) -> BernoulliEstimate:
    """Fraction of trials where either the SNR or the SIR test fails (estimates O_M)."""
    ACTION = f"Simulate link outage SF{cfg.sf} d1={cfg.d1} M={cfg.copies} ({cfg.trials} trials)"
    logger.start(ACTION)

    def failures(rng: np.random.Generator, size: int) -> int:
        connected = _connection_successes(rng, size, cfg)
        captured = _capture_successes(rng, size, cfg)
        return np.count_nonzero(~(connected & captured))

    try:
        lost = count_successes(cfg.trials, cfg.seed, STREAM_LINK, failures, threads)
        return BernoulliEstimate.from_counts(lost, cfg.trials, cfg.seed)
    finally:
        logger.close(ACTION)
