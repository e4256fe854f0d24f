"""
Supported device count at a reliability target and exhaustive search for the best
replication configuration.

At the cell border the capture argument is 1/theta, so the average number of SF-j
devices that keeps the final outage at 1 - T is

    N_j = -ln((1 - O_M) / H1) / (2 M p_j 2F1(1, 2/eta; 1 + 2/eta; -1/theta))

where O_M is the link outage at which the scheme's final outage equals 1 - T.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple

from src import config
from src.logger.format import format_probability
from src.logger.logger import MyLogger
from src.model.channel import capture_argument, connection_prob, link_outage
from src.model.errors import DomainError, NumericalConvergenceError
from src.model.hypergeometric import hyp2f1_capture
from src.model.params import NetworkScenario, SchemeConfig, activity_factor, max_copies
from src.model.schemes import final_outage

logger = MyLogger(config.LOG_NAME)

SearchKind = Literal["DT", "RT", "CT", "HT", "HT*"]
SEARCH_KINDS: Tuple[str, ...] = ("DT", "RT", "CT", "HT", "HT*")

_MAX_BISECTION_STEPS = 200


@dataclass(frozen=True)
class CapacityResult:
    sf: int
    config: SchemeConfig
    target: float
    required_link_outage: float
    h1: float
    n_devices: float
    reachable: bool
    near_ties: Tuple[Tuple[SchemeConfig, float], ...] = field(default=())


@dataclass(frozen=True)
class OutageChoice:
    """Configuration of a search kind with the lowest final outage at the current load."""
    sf: int
    config: SchemeConfig
    link_outage: float
    final_outage: float


def invert_scheme(scheme: SchemeConfig, target_final_outage: float) -> float:
    """
    Link outage o with final_outage(scheme, o) = target, found by bisection on [0, 1].

    :param scheme: Replication configuration.
    :param target_final_outage: Final outage to reach, in (0, 1).
    :return: The required link outage.
    :raises DomainError: If the target is outside (0, 1).
    :raises NumericalConvergenceError: If bisection does not reach the configured tolerance.
    """
    if not 0.0 < target_final_outage < 1.0:
        raise DomainError(f"Target final outage must lie in (0, 1), got {target_final_outage}")

    lo, hi = 0.0, 1.0
    for _ in range(_MAX_BISECTION_STEPS):
        if hi - lo <= config.BISECTION_TOLERANCE:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if final_outage(scheme, mid) < target_final_outage:
            lo = mid
        else:
            hi = mid
    raise NumericalConvergenceError(
        f"Bisection for {scheme} at target {target_final_outage} did not converge "
        f"(bracket [{lo}, {hi}])"
    )


def border_capture_integral(scenario: NetworkScenario) -> float:
    """2F1(1, 2/eta; 1 + 2/eta; -1/theta), the interference integral at d1 = R."""
    return hyp2f1_capture(scenario.ploss_exponent, capture_argument(scenario, scenario.radius_m))


def max_devices(scenario: NetworkScenario, sf: int, scheme: SchemeConfig, target: float) -> CapacityResult:
    """
    Average number of SF-j devices the cell supports while a border node still meets
    the reliability target. Scenario densities are not used.

    :param target: Required success probability after decoding, in (0, 1).
    :return: The capacity; ``reachable`` is False (and n_devices 0) when the target is
        out of reach even without interferers.
    """
    if not 0.0 < target < 1.0:
        raise DomainError(f"Reliability target must lie in (0, 1), got {target}")

    required = invert_scheme(scheme, 1.0 - target)
    h1 = connection_prob(scenario, sf, scenario.radius_m)
    if h1 <= 0.0 or (1.0 - required) > h1:
        return CapacityResult(sf=sf, config=scheme, target=target, required_link_outage=required,
                              h1=h1, n_devices=0.0, reachable=False)

    denominator = 2.0 * scheme.copies * activity_factor(scenario, sf) * border_capture_integral(scenario)
    n_devices = max(0.0, -math.log((1.0 - required) / h1) / denominator)
    return CapacityResult(sf=sf, config=scheme, target=target, required_link_outage=required,
                          h1=h1, n_devices=n_devices, reachable=True)


def enumerate_configs(kind: str, cap: int) -> List[SchemeConfig]:
    """
    Every configuration of ``kind`` using at most ``cap`` copies. HT lists n = 0 once
    (with r = 1), since r has no effect without coded messages.
    """
    if cap < 1:
        raise DomainError(f"Copy cap must be at least 1, got {cap}")
    if kind == "DT":
        return [SchemeConfig.dt()]
    if kind == "RT":
        return [SchemeConfig.rt(m) for m in range(1, cap + 1)]
    if kind == "CT":
        return [SchemeConfig.ct(n) for n in range(0, cap)]
    if kind in ("HT", "HT*"):
        configs = []
        for m in range(1, cap + 1):
            configs.append(SchemeConfig.ht(m, 0, 1))
            for n in range(1, cap):
                for r in range(1, cap + 1):
                    if m + n * r <= cap:
                        configs.append(SchemeConfig.ht(m, n, r))
        return configs
    raise DomainError(f"Unknown search kind '{kind}', expected one of {SEARCH_KINDS}")


def _tie_key(scheme: SchemeConfig) -> Tuple[int, int, int, int]:
    return scheme.copies, scheme.n, scheme.m, scheme.r


def _map(func, items, threads: int):
    if threads <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))


def _search_cap(scenario: NetworkScenario, sf: int, kind: str, m_cap: Optional[int], choose_ct) -> int:
    cap = max_copies(scenario, sf, m_cap)
    if kind == "HT*":
        cap = choose_ct(cap).config.copies
    return cap


def optimize(scenario: NetworkScenario, sf: int, target: float, kind: str,
             m_cap: Optional[int] = None, threads: int = 1) -> CapacityResult:
    """
    Configuration of ``kind`` supporting the most devices at ``target``.

    The search covers every configuration within the duty-cycle copy limit (further
    bounded by ``m_cap``); HT* restricts HT to the copy count of the best CT. Equal
    capacities go to the smallest M, then the smallest n, then the smallest m.
    Candidates within the near-tie fraction of the winner are listed in ``near_ties``.

    :param kind: One of DT, RT, CT, HT, HT*.
    :param m_cap: Search-space cap on copies; defaults to the scenario's copy cap.
    :param threads: Worker threads for evaluating candidates.
    """
    ACTION = f"Optimize {kind} for SF{sf} at target {target}"
    logger.start(ACTION)
    try:
        cap = _search_cap(scenario, sf, kind, m_cap,
                          lambda c: optimize(scenario, sf, target, "CT", c, threads))
        candidates = enumerate_configs(kind, cap)
        results = _map(lambda scheme: max_devices(scenario, sf, scheme, target), candidates, threads)

        ranked = sorted(results, key=lambda res: (-res.n_devices,) + _tie_key(res.config))
        best = ranked[0]
        near_ties: Tuple[Tuple[SchemeConfig, float], ...] = ()
        if best.n_devices > 0:
            threshold = best.n_devices * (1.0 - config.NEAR_TIE_FRACTION)
            near_ties = tuple((res.config, res.n_devices) for res in ranked[1:] if res.n_devices >= threshold)

        logger.info(f"{len(candidates)} candidates (cap {cap}); best {best.config} with "
                    f"N={best.n_devices:.2f}, O_M={format_probability(best.required_link_outage)}"
                    + (f"; near ties {[str(c) for c, _ in near_ties]}" if near_ties else ""))
        if not best.reachable:
            logger.warning(f"SF{sf}: target {target} is unreachable for {kind} even without interferers.")
        return CapacityResult(sf=best.sf, config=best.config, target=best.target,
                              required_link_outage=best.required_link_outage, h1=best.h1,
                              n_devices=best.n_devices, reachable=best.reachable, near_ties=near_ties)
    finally:
        logger.close(ACTION)


def best_outage_config(scenario: NetworkScenario, sf: int, kind: str,
                       m_cap: Optional[int] = None, d1: Optional[float] = None) -> OutageChoice:
    """
    Configuration of ``kind`` with the lowest final outage for the scenario's current
    SF-j density, evaluated at distance ``d1`` (the border by default).
    """
    distance = scenario.radius_m if d1 is None else d1
    cap = _search_cap(scenario, sf, kind, m_cap,
                      lambda c: best_outage_config(scenario, sf, "CT", c, distance))

    choices = []
    for scheme in enumerate_configs(kind, cap):
        o = link_outage(scenario, sf, distance, scheme.copies).link_outage
        choices.append(OutageChoice(sf=sf, config=scheme, link_outage=o, final_outage=final_outage(scheme, o)))
    return min(choices, key=lambda choice: (choice.final_outage,) + _tie_key(choice.config))
