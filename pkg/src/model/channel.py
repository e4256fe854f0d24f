"""
Link-level model of one uplink at distance d1 from the gateway: log-distance path
loss, Rayleigh fading, thermal noise, and capture against a Poisson field of
same-SF interferers. The connection (SNR) and capture (SIR) events are treated as
independent, so their product lower-bounds the coverage probability.
"""
import math
from dataclasses import dataclass

from src.model.errors import DomainError
from src.model.hypergeometric import hyp2f1_capture
from src.model.params import NetworkScenario, activity_factor, db_to_linear

# Unslotted ALOHA: a packet is vulnerable to any overlap in a window twice its length.
ALOHA_VULNERABILITY = 2.0


@dataclass(frozen=True)
class OutageBreakdown:
    sf: int
    copies: int
    distance_m: float
    h1: float
    q1: float
    link_outage: float


def _check_distance(scenario: NetworkScenario, d1: float) -> None:
    if not 0 < d1 <= scenario.radius_m:
        raise DomainError(f"d1 must lie in (0, {scenario.radius_m}] m, got {d1}")


def path_gain(scenario: NetworkScenario, d: float) -> float:
    """Linear gain PL0^-1 * (d/d0)^-eta."""
    if not d > 0:
        raise DomainError(f"Path gain needs d > 0, got {d}")
    return db_to_linear(-scenario.ploss_ref_db) * (d / scenario.ref_dist_m) ** (-scenario.ploss_exponent)


def path_loss_db(scenario: NetworkScenario, d: float) -> float:
    return -10.0 * math.log10(path_gain(scenario, d))


def noise_power_dbm(scenario: NetworkScenario) -> float:
    """Thermal noise over the channel bandwidth, -174 + NF + 10 log10(B)."""
    return -174.0 + scenario.noise_figure_db + 10.0 * math.log10(scenario.bandwidth_hz)


def mean_snr(scenario: NetworkScenario, d1: float) -> float:
    """Linear SNR averaged over fading at distance d1, from the dB link budget."""
    snr_db = scenario.tx_power_dbm - path_loss_db(scenario, d1) - noise_power_dbm(scenario)
    return db_to_linear(snr_db)


def connection_prob(scenario: NetworkScenario, sf: int, d1: float) -> float:
    """
    H1 = P[SNR >= q_j] = exp(-N q_j / (Pt g(d1))) under exponential (Rayleigh) fading.

    :raises DomainError: If d1 is outside (0, R].
    """
    _check_distance(scenario, d1)
    q = scenario.sf_params(sf).snr_threshold_linear
    return math.exp(-q / mean_snr(scenario, d1))


def capture_argument(scenario: NetworkScenario, d1: float) -> float:
    """z = R^eta / (theta * d1^eta); equals 1/theta at the cell border."""
    _check_distance(scenario, d1)
    return (scenario.radius_m / d1) ** scenario.ploss_exponent / scenario.sir_threshold_linear


def interferer_load(scenario: NetworkScenario, sf: int, copies: int) -> float:
    """Mean number of overlapping same-SF transmissions, 2 * N_j * M * p_j."""
    if copies < 1:
        raise DomainError(f"copies must be at least 1, got {copies}")
    return ALOHA_VULNERABILITY * scenario.mean_devices(sf) * copies * activity_factor(scenario, sf)


def capture_prob(scenario: NetworkScenario, sf: int, d1: float, copies: int) -> float:
    """
    Q1,M = exp(-2 pi R^2 rho_j M p_j 2F1(1, 2/eta; 1+2/eta; -R^eta/(theta d1^eta))).

    Replication scales the channel load, so Q1,M = Q1,1 ** M.

    :raises DomainError: If d1 is outside (0, R] or copies < 1.
    """
    z = capture_argument(scenario, d1)
    load = interferer_load(scenario, sf, copies)
    if load == 0:
        return 1.0
    return math.exp(-load * hyp2f1_capture(scenario.ploss_exponent, z))


def link_outage(scenario: NetworkScenario, sf: int, d1: float, copies: int) -> OutageBreakdown:
    """Probability one copy is lost, O_M = 1 - H1 * Q1,M, with its two factors."""
    h1 = connection_prob(scenario, sf, d1)
    q1 = capture_prob(scenario, sf, d1, copies)
    return OutageBreakdown(sf=sf, copies=copies, distance_m=d1, h1=h1, q1=q1, link_outage=1.0 - h1 * q1)
