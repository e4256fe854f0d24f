"""
Operations behind the CLI subcommands. Each ``cmd_*`` function takes a loaded
scenario and resolved options and returns the table (or report) to be written;
file output and manifests are handled by ``src.main``.
"""
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src import config
from src.logger.format import iterate_with_count
from src.logger.logger import MyLogger
from src.model.capacity import SEARCH_KINDS, CapacityResult, best_outage_config, optimize
from src.model.channel import capture_prob, connection_prob, link_outage
from src.model.energy import ENERGY_FORMULAS, ENERGY_MODES, avg_current
from src.model.errors import DomainError, InfeasiblePeriodError
from src.model.params import NetworkScenario, SchemeConfig, max_copies
from src.model.schemes import final_outage
from src.reporting.tables import records_frame
from src.verification.mcsim import TrialConfig, simulate_capture, simulate_connection, simulate_link_outage
from src.verification.suites import VerificationReport, run_verification

logger = MyLogger(config.LOG_NAME)

OUTAGE_COLUMNS = ["scheme", "selection", "m", "n", "r", "M", "n_devices", "link_outage", "final_outage"]
CAPACITY_COLUMNS = ["sf", "kind", "target", "scheme", "m", "n", "r", "M", "required_O_M", "h1",
                    "n_devices", "reachable", "near_ties", "interpretation"]
ENERGY_COLUMNS = ["sf", "M", "mode", "formula", "within_duty_cycle", "feasible", "avg_current_mA",
                  "sleep_s", "lifetime_h", "lifetime_days"]
SIMULATE_COLUMNS = ["quantity", "sf", "d1_m", "n_devices", "M", "estimate", "stderr", "trials", "seed", "analytic"]
SIMULATE_QUANTITIES = ("connection", "capture", "link_outage")


def _scheme_columns(scheme: SchemeConfig) -> Dict[str, Any]:
    return {"scheme": scheme.label, "m": scheme.m, "n": scheme.n, "r": scheme.r, "M": scheme.copies}


def cmd_outage(scenario: NetworkScenario, sf: int, schemes: Sequence[SchemeConfig],
               link_outages: Sequence[float] = (), device_counts: Sequence[float] = (),
               optimal_kinds: Sequence[str] = (), m_cap: Optional[int] = None) -> pd.DataFrame:
    """
    Final outage of each scheme over a grid of link outages, or over a device-count
    sweep where each N is turned into the border link outage of SF ``sf`` first.

    :param schemes: Configurations to evaluate.
    :param link_outages: O_M grid; used when ``device_counts`` is empty.
    :param device_counts: Average SF-``sf`` device counts to sweep.
    :param optimal_kinds: Search kinds whose lowest-outage configuration is added per point
        (``selection`` holds the kind). Needs ``device_counts``.
    :return: One row per (point, scheme).
    :raises DomainError: If there is nothing to evaluate or a probability is out of range.
    """
    ACTION = f"Outage table SF{sf}"
    logger.start(ACTION)
    try:
        if optimal_kinds and not device_counts:
            raise DomainError("Optimal configurations need a device-count sweep (--devices)")
        if not schemes and not optimal_kinds:
            raise DomainError("No scheme to evaluate; pass --scheme or --optimal")
        scenario.sf_params(sf)

        records: List[Dict[str, Any]] = []
        if not device_counts:
            if not link_outages:
                raise DomainError("Pass a link-outage grid (--link-outage) or a device sweep (--devices)")
            for o in link_outages:
                for scheme in schemes:
                    records.append({**_scheme_columns(scheme), "selection": "given", "n_devices": np.nan,
                                    "link_outage": o, "final_outage": final_outage(scheme, o)})
        else:
            for n_devices in device_counts:
                loaded = scenario.with_devices(sf, n_devices)
                for scheme in schemes:
                    o = link_outage(loaded, sf, loaded.radius_m, scheme.copies).link_outage
                    records.append({**_scheme_columns(scheme), "selection": "given", "n_devices": n_devices,
                                    "link_outage": o, "final_outage": final_outage(scheme, o)})
                for kind in optimal_kinds:
                    choice = best_outage_config(loaded, sf, kind, m_cap)
                    records.append({**_scheme_columns(choice.config), "selection": kind, "n_devices": n_devices,
                                    "link_outage": choice.link_outage, "final_outage": choice.final_outage})
        logger.info(f"{len(records)} outage rows")
        return records_frame(records, OUTAGE_COLUMNS)
    finally:
        logger.close(ACTION)


def _near_ties_text(result: CapacityResult) -> str:
    return ";".join(f"{scheme.label}:{n:.6g}" for scheme, n in result.near_ties)


def cmd_capacity(scenario: NetworkScenario, sfs: Sequence[int], targets: Sequence[float],
                 kinds: Sequence[str] = SEARCH_KINDS, m_cap: Optional[int] = None,
                 threads: int = 1) -> pd.DataFrame:
    """
    Optimal configuration and supported device count per (SF, kind, target), followed
    by one ``sum_over_sf`` row per (kind, target) adding N over the SFs. Unreachable
    targets are rows with ``reachable`` False, not errors.
    """
    ACTION = "Capacity table"
    logger.start(ACTION)
    try:
        for target in targets:
            if not 0.0 < target < 1.0:
                raise DomainError(f"Reliability targets must lie in (0, 1), got {target}")
        for kind in kinds:
            if kind not in SEARCH_KINDS:
                raise DomainError(f"Unknown search kind '{kind}', expected one of {SEARCH_KINDS}")

        records: List[Dict[str, Any]] = []
        totals: Dict[tuple, float] = {}
        for target in targets:
            for kind in kinds:
                for sf in sfs:
                    result = optimize(scenario, sf, target, kind, m_cap, threads)
                    records.append({
                        "sf": sf, "kind": kind, "target": target, **_scheme_columns(result.config),
                        "required_O_M": result.required_link_outage, "h1": result.h1,
                        "n_devices": result.n_devices, "reachable": result.reachable,
                        "near_ties": _near_ties_text(result), "interpretation": "per_sf",
                    })
                    totals[(target, kind)] = totals.get((target, kind), 0.0) + result.n_devices
        for (target, kind), total in totals.items():
            records.append({"sf": "sum", "kind": kind, "target": target, "n_devices": total,
                            "near_ties": "", "interpretation": "sum_over_sf"})
        return records_frame(records, CAPACITY_COLUMNS)
    finally:
        logger.close(ACTION)


def cmd_energy(scenario: NetworkScenario, sfs: Sequence[int], copies: Sequence[int],
               modes: Sequence[str] = ENERGY_MODES, formulas: Sequence[str] = ENERGY_FORMULAS,
               battery_mah: Optional[float] = None) -> pd.DataFrame:
    """
    Average current and lifetime for every (SF, M, mode, formula). Rows whose state
    sequences do not fit in the period have ``feasible`` False and empty values;
    ``within_duty_cycle`` marks copy counts the duty-cycle limit allows.
    """
    ACTION = "Energy table"
    logger.start(ACTION)
    try:
        battery = scenario.battery_mah if battery_mah is None else battery_mah
        records: List[Dict[str, Any]] = []
        for sf in sfs:
            table = scenario.energy_table(sf)
            duty_limit = max_copies(scenario, sf, hard_cap=max(max(copies, default=1), 1))
            for m in copies:
                for mode in modes:
                    for formula in formulas:
                        row: Dict[str, Any] = {"sf": sf, "M": m, "mode": mode, "formula": formula,
                                               "within_duty_cycle": m <= duty_limit}
                        try:
                            report = avg_current(table, m, scenario.period_s, mode, formula, battery)
                        except InfeasiblePeriodError as e:
                            logger.warning(f"Skipping infeasible row: {e}")
                            row.update(feasible=False)
                        else:
                            row.update(feasible=True, avg_current_mA=report.avg_current_ma,
                                       sleep_s=report.sleep_time, lifetime_h=report.lifetime_h,
                                       lifetime_days=report.lifetime_days)
                        records.append(row)
        return records_frame(records, ENERGY_COLUMNS)
    finally:
        logger.close(ACTION)


def _analytic_value(quantity: str, scenario: NetworkScenario, sf: int, d1: float, m: int) -> float:
    if quantity == "connection":
        return connection_prob(scenario, sf, d1)
    if quantity == "capture":
        return capture_prob(scenario, sf, d1, m)
    return link_outage(scenario, sf, d1, m).link_outage


def cmd_simulate(scenario: NetworkScenario, sf: int, distances: Sequence[float],
                 device_counts: Sequence[float], copies: Sequence[int], trials: int, seed: int,
                 quantities: Sequence[str] = SIMULATE_QUANTITIES, threads: int = 1) -> List[Dict[str, Any]]:
    """
    Monte Carlo estimates with their analytic counterparts, one record per
    (quantity, distance, device count, M). Every point uses the same seed.

    :param distances: Distances d1 in metres.
    :return: Records with estimate, stderr, trials, seed and the analytic value.
    """
    ACTION = f"Simulate SF{sf}"
    logger.start(ACTION)
    try:
        simulators = {"connection": simulate_connection, "capture": simulate_capture,
                      "link_outage": simulate_link_outage}
        for quantity in quantities:
            if quantity not in simulators:
                raise DomainError(f"Unknown quantity '{quantity}', expected one of {SIMULATE_QUANTITIES}")

        points = [(q, d1, n, m) for q in quantities for d1 in distances for n in device_counts for m in copies]
        records = []
        for count_str, (quantity, d1, n_devices, m) in iterate_with_count(points, eta=True):
            loaded = scenario.with_devices(sf, n_devices)
            logger.info(f"{count_str} {quantity} d1={d1} N={n_devices} M={m}")
            estimate = simulators[quantity](TrialConfig(loaded, sf, d1, m, trials, seed), threads)
            records.append({"quantity": quantity, "sf": sf, "d1_m": d1, "n_devices": n_devices, "M": m,
                            **estimate.as_dict(), "analytic": _analytic_value(quantity, loaded, sf, d1, m)})
        return records
    finally:
        logger.close(ACTION)


def cmd_verify(scenario: NetworkScenario, levels: Sequence[str], seed: int, trials: int,
               threads: int = 1) -> VerificationReport:
    """Run the requested agreement suites; the caller turns a failing report into a non-zero exit."""
    report = run_verification(scenario, levels, seed, trials, threads)
    if report.passed:
        logger.info(f"Verification passed ({len(report.checks)} checks)")
    else:
        logger.error(f"Verification failed at {report.first_failure.name}: {report.first_failure.detail}")
    return report
