"""
Average current and battery lifetime of a device sending M copies per period.

In the default protocol every copy runs the full state sequence 1..10 (wake-up to
second receive window). The modified protocol opens the receive windows (states
7..10) only after the last copy. Two accountings are available: ``literal`` scales
the whole bracket by M/P as originally printed, ``charge_balance`` counts the
charge actually drawn per period and divides by P.
"""
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from src import config
from src.model.errors import DomainError, InfeasiblePeriodError
from src.model.params import EnergyState, EnergyStateTable

EnergyMode = Literal["default", "modified"]
EnergyFormula = Literal["literal", "charge_balance"]
ENERGY_MODES = ("default", "modified")
ENERGY_FORMULAS = ("literal", "charge_balance")


@dataclass(frozen=True)
class EnergyReport:
    sf: int
    copies: int
    period_s: float
    mode: str
    formula: str
    avg_current: float
    sleep_time: float
    sleep_charge_fraction: float
    battery_mah: float
    lifetime_h: float

    @property
    def avg_current_ma(self) -> float:
        return self.avg_current * 1e3

    @property
    def lifetime_days(self) -> float:
        return self.lifetime_h / 24.0


def _charge(states: Sequence[EnergyState]) -> float:
    return sum(s.duration * s.current for s in states)


def _duration(states: Sequence[EnergyState]) -> float:
    return sum(s.duration for s in states)


def _check_inputs(copies: int, period_s: float, formula: str) -> None:
    if copies < 1:
        raise DomainError(f"copies must be at least 1, got {copies}")
    if not period_s > 0:
        raise DomainError(f"period must be positive, got {period_s}")
    if formula not in ENERGY_FORMULAS:
        raise DomainError(f"Unknown energy formula '{formula}', expected one of {ENERGY_FORMULAS}")


def battery_hours(avg_current: float, battery_mah: float) -> float:
    """
    Battery lifetime in hours, C_battery / I_avg.

    :param avg_current: Average current in amperes, strictly positive.
    :param battery_mah: Battery capacity in mAh.
    """
    if not avg_current > 0:
        raise DomainError(f"Average current must be positive, got {avg_current}")
    return battery_mah / (avg_current * 1e3)


def _report(table: EnergyStateTable, copies: int, period_s: float, mode: str, formula: str,
            active_charge: float, sleep_time: float, scale: float, battery_mah: float) -> EnergyReport:
    sleep_charge = sleep_time * table.sleep.current
    avg_current = scale * (active_charge + sleep_charge) / period_s
    return EnergyReport(
        sf=table.sf, copies=copies, period_s=period_s, mode=mode, formula=formula,
        avg_current=avg_current, sleep_time=sleep_time,
        sleep_charge_fraction=sleep_charge / (active_charge + sleep_charge),
        battery_mah=battery_mah, lifetime_h=battery_hours(avg_current, battery_mah),
    )


def avg_current_default(table: EnergyStateTable, copies: int, period_s: float,
                        formula: str = "literal",
                        battery_mah: Optional[float] = None) -> EnergyReport:
    """
    Default protocol, every copy followed by both receive windows.

    literal:        (M/P) (sum_1..10 T_i I_i + T_sleep I_sleep)
    charge_balance: (1/P) (M sum_1..10 T_i I_i + T_sleep I_sleep)
    with T_sleep = P - M sum_1..10 T_i.

    :raises InfeasiblePeriodError: If the M state sequences do not fit in the period.
    """
    _check_inputs(copies, period_s, formula)
    battery = config.DEFAULT_BATTERY_MAH if battery_mah is None else battery_mah
    sleep_time = period_s - copies * _duration(table.active_states)
    if sleep_time < 0:
        raise InfeasiblePeriodError(
            f"SF{table.sf}: {copies} copies need {copies * _duration(table.active_states):.3f} s of "
            f"active time, more than the {period_s} s period"
        )
    per_copy = _charge(table.active_states)
    if formula == "literal":
        return _report(table, copies, period_s, "default", formula, per_copy, sleep_time, copies, battery)
    return _report(table, copies, period_s, "default", formula, copies * per_copy, sleep_time, 1, battery)


def avg_current_modified(table: EnergyStateTable, copies: int, period_s: float,
                         formula: str = "literal",
                         battery_mah: Optional[float] = None) -> EnergyReport:
    """
    Modified protocol, receive windows opened once after the last copy.

    literal:        (M/P) (sum_1..6 T_i I_i + sum_7..10 T_i I_i + T_sleep2 I_sleep)
    charge_balance: (1/P) (M sum_1..6 T_i I_i + sum_7..10 T_i I_i + T_sleep2 I_sleep)
    with T_sleep2 = P - M sum_1..6 T_i - sum_7..10 T_i.

    Under ``literal`` the receive windows and the sleep term are multiplied by M
    as well, so for M > 1 this exceeds the default current by
    (M/P)(M-1) sum_7..10 T_i I_sleep.

    :raises InfeasiblePeriodError: If the active time does not fit in the period.
    """
    _check_inputs(copies, period_s, formula)
    battery = config.DEFAULT_BATTERY_MAH if battery_mah is None else battery_mah
    active_time = copies * _duration(table.transmit_states) + _duration(table.receive_states)
    sleep_time = period_s - active_time
    if sleep_time < 0:
        raise InfeasiblePeriodError(
            f"SF{table.sf}: {copies} copies need {active_time:.3f} s of active time, "
            f"more than the {period_s} s period"
        )
    transmit = _charge(table.transmit_states)
    receive = _charge(table.receive_states)
    if formula == "literal":
        return _report(table, copies, period_s, "modified", formula, transmit + receive, sleep_time, copies, battery)
    return _report(table, copies, period_s, "modified", formula, copies * transmit + receive, sleep_time, 1, battery)


def avg_current(table: EnergyStateTable, copies: int, period_s: float, mode: str = "default",
                formula: str = "literal", battery_mah: Optional[float] = None) -> EnergyReport:
    if mode == "default":
        return avg_current_default(table, copies, period_s, formula, battery_mah)
    if mode == "modified":
        return avg_current_modified(table, copies, period_s, formula, battery_mah)
    raise DomainError(f"Unknown energy mode '{mode}', expected one of {ENERGY_MODES}")


def lifetime(report: EnergyReport, battery_mah: Optional[float] = None) -> float:
    """Lifetime in hours of the reported current on a battery of ``battery_mah`` (the report's own by default)."""
    return battery_hours(report.avg_current, report.battery_mah if battery_mah is None else battery_mah)
