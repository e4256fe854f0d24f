"""
Constant tables and the user-facing scenario description.

Everything in here is stored in SI base units (seconds, hertz, amperes, metres);
decibel quantities keep their dB value and expose the linear value as a property,
so the conversion happens in exactly one place.
"""
import math
import re
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Dict, Literal, Mapping, Optional, Tuple

from src import config
from src.logger.logger import MyLogger
from src.model.errors import DomainError, ScenarioError, SchemeConfigError

logger = MyLogger(config.LOG_NAME)

SchemeKind = Literal["DT", "RT", "CT", "HT"]
SCHEME_KINDS: Tuple[str, ...] = ("DT", "RT", "CT", "HT")

# Guards floor(limit / p) against the representation error of p = toa / P.
_DUTY_FLOOR_SLACK = 1e-12


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class SfParams:
    """PHY constants of one spreading factor (9-byte payload, 125 kHz, CRC and header on)."""
    sf: int
    toa: float
    snr_threshold_db: float
    rx1w: float
    rx2w: float

    @property
    def snr_threshold_linear(self) -> float:
        return db_to_linear(self.snr_threshold_db)


_DEFAULT_SF_ROWS = (
    # sf, time-on-air, SNR threshold, 1st and 2nd receive windows
    (7, 41.22e-3, -6.0, 12.29e-3, 1.28e-3),
    (8, 72.19e-3, -9.0, 24.58e-3, 2.30e-3),
    (9, 144.38e-3, -12.0, 49.15e-3, 4.35e-3),
    (10, 247.81e-3, -15.0, 98.30e-3, 8.45e-3),
    (11, 495.62e-3, -17.5, 131.07e-3, 16.64e-3),
    (12, 991.23e-3, -20.0, 262.14e-3, 33.02e-3),
)


def default_sf_table() -> Tuple[SfParams, ...]:
    """The six uplink rows for SF7..SF12."""
    return tuple(SfParams(*row) for row in _DEFAULT_SF_ROWS)


def validate_sf_table(sf_table: Tuple[SfParams, ...]) -> None:
    """
    :raises ScenarioError: On non-positive times, or when time-on-air is not strictly
        increasing / the SNR threshold not strictly decreasing with the SF.
    """
    if not sf_table:
        raise ScenarioError("SF table is empty.")
    for row in sf_table:
        if min(row.toa, row.rx1w, row.rx2w) <= 0:
            raise ScenarioError(f"SF{row.sf}: time-on-air and receive windows must be positive, got {row}")
    ordered = sorted(sf_table, key=lambda row: row.sf)
    for lower, upper in zip(ordered, ordered[1:]):
        if lower.sf == upper.sf:
            raise ScenarioError(f"SF{lower.sf} appears twice in the SF table.")
        if upper.toa <= lower.toa:
            raise ScenarioError(f"Time-on-air must increase with SF (SF{lower.sf}={lower.toa}, SF{upper.sf}={upper.toa}).")
        if upper.snr_threshold_db >= lower.snr_threshold_db:
            raise ScenarioError(
                f"SNR threshold must decrease with SF "
                f"(SF{lower.sf}={lower.snr_threshold_db} dB, SF{upper.sf}={upper.snr_threshold_db} dB)."
            )


# --- Energy states ---

@dataclass(frozen=True)
class EnergyState:
    """One operating state; the sleep state carries no duration (it fills the period)."""
    index: int
    name: str
    duration: Optional[float]
    current: float


# Durations of the SF-dependent states (3, 8, 9, 10) are substituted per SF.
_ENERGY_STATE_ROWS = (
    (1, "wake_up", 168.2e-3, 22.1e-3),
    (2, "radio_preparation", 83.8e-3, 13.3e-3),
    (3, "transmission", None, 83.0e-3),
    (4, "radio_off", 147.4e-3, 13.2e-3),
    (5, "postprocessing", 268.0e-3, 21.0e-3),
    (6, "turn_off_sequence", 38.6e-3, 13.3e-3),
    (7, "wait_first_window", 983.3e-3, 27.0e-3),
    (8, "first_receive_window", None, 38.1e-3),
    (9, "wait_second_window", None, 27.1e-3),
    (10, "second_receive_window", None, 35.0e-3),
    (11, "sleep", None, 45e-6),
)

N_ENERGY_STATES = 11
LAST_TRANSMIT_STATE = 6  # states 1..6 run once per copy, 7..10 are the receive-window sequence


def default_energy_states() -> Tuple[EnergyState, ...]:
    return tuple(EnergyState(*row) for row in _ENERGY_STATE_ROWS)


@dataclass(frozen=True)
class EnergyStateTable:
    """The eleven operating states of an unacknowledged uplink, resolved for one SF."""
    sf: int
    states: Tuple[EnergyState, ...]

    def __post_init__(self):
        if len(self.states) != N_ENERGY_STATES:
            raise ScenarioError(f"Energy table needs exactly {N_ENERGY_STATES} states, got {len(self.states)}.")
        if [s.index for s in self.states] != list(range(1, N_ENERGY_STATES + 1)):
            raise ScenarioError("Energy states must be numbered 1..11 in order.")
        if any(s.current <= 0 for s in self.states):
            raise ScenarioError("All energy-state currents must be positive.")
        if self.sleep.current > min(s.current for s in self.states):
            raise ScenarioError("The sleep current must be the smallest current of the table.")
        for state in self.active_states:
            if state.duration is None or state.duration < 0:
                raise ScenarioError(f"State {state.index} ({state.name}) needs a non-negative duration.")

    @property
    def active_states(self) -> Tuple[EnergyState, ...]:
        return self.states[:-1]

    @property
    def transmit_states(self) -> Tuple[EnergyState, ...]:
        return self.states[:LAST_TRANSMIT_STATE]

    @property
    def receive_states(self) -> Tuple[EnergyState, ...]:
        return self.states[LAST_TRANSMIT_STATE:-1]

    @property
    def sleep(self) -> EnergyState:
        return self.states[-1]


def default_energy_table(sf_params: SfParams,
                         base_states: Optional[Tuple[EnergyState, ...]] = None) -> EnergyStateTable:
    """
    Resolve the energy states for one SF: transmission lasts the time-on-air, the two
    receive windows come from the SF row, and the wait before the second window lasts
    one second minus the first window.

    :param sf_params: Row of the SF table.
    :param base_states: States to resolve; defaults to the built-in table.
    :return: The resolved table.
    :raises DomainError: If the first receive window is not shorter than one second.
    """
    if sf_params.rx1w >= 1.0:
        raise DomainError(f"SF{sf_params.sf}: first receive window {sf_params.rx1w} s must be shorter than 1 s.")

    sf_durations = {
        3: sf_params.toa,
        8: sf_params.rx1w,
        9: 1.0 - sf_params.rx1w,
        10: sf_params.rx2w,
    }
    states = base_states if base_states is not None else default_energy_states()
    resolved = tuple(
        replace(s, duration=sf_durations[s.index]) if s.index in sf_durations else s
        for s in states
    )
    return EnergyStateTable(sf=sf_params.sf, states=resolved)


# --- Scenario ---

@dataclass(frozen=True)
class NetworkScenario:
    """
    Single-gateway deployment: a disk of radius R, log-distance path loss, Rayleigh
    fading, one Poisson field of devices per SF. Immutable; use ``with_density`` /
    ``replace`` to derive variants.
    """
    radius_m: float = 200.0
    ploss_exponent: float = 3.51
    ploss_ref_db: float = 55.05
    ref_dist_m: float = 15.0
    tx_power_dbm: float = 11.0
    bandwidth_hz: float = 125e3
    noise_figure_db: float = 6.0
    sir_threshold_db: float = 1.0
    period_s: float = 600.0
    duty_cycle_limit: float = 0.01
    densities: Mapping[int, float] = field(default_factory=dict)
    theta_linear: bool = False
    battery_mah: float = config.DEFAULT_BATTERY_MAH
    targets: Tuple[float, ...] = config.DEFAULT_TARGETS
    copy_cap: int = config.DEFAULT_COPY_CAP
    sf_table: Tuple[SfParams, ...] = field(default_factory=default_sf_table)
    energy_states: Tuple[EnergyState, ...] = field(default_factory=default_energy_states)

    def __post_init__(self):
        densities = {int(sf): float(rho) for sf, rho in dict(self.densities).items()}
        object.__setattr__(self, "densities", MappingProxyType(densities))
        object.__setattr__(self, "sf_table", tuple(sorted(self.sf_table, key=lambda row: row.sf)))
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        object.__setattr__(self, "energy_states", tuple(self.energy_states))
        self._validate()

    def _validate(self):
        if not self.radius_m > self.ref_dist_m > 0:
            raise ScenarioError(
                f"Need radius_m > ref_dist_m > 0, got radius_m={self.radius_m}, ref_dist_m={self.ref_dist_m}"
            )
        if not self.ploss_exponent > 2:
            raise ScenarioError(f"Path-loss exponent must exceed 2, got {self.ploss_exponent}")
        if not self.period_s > 0:
            raise ScenarioError(f"Period must be positive, got {self.period_s}")
        if self.theta_linear and not self.sir_threshold_db > 0:
            raise ScenarioError(f"A linear SIR threshold must be positive, got {self.sir_threshold_db}")
        if not self.bandwidth_hz > 0:
            raise ScenarioError(f"Bandwidth must be positive, got {self.bandwidth_hz}")
        if not 0 < self.duty_cycle_limit <= 1:
            raise ScenarioError(f"Duty-cycle limit must lie in (0, 1], got {self.duty_cycle_limit}")
        if self.battery_mah < 0:
            raise ScenarioError(f"Battery capacity must be non-negative, got {self.battery_mah}")
        if self.copy_cap < 1:
            raise ScenarioError(f"Copy cap must be at least 1, got {self.copy_cap}")
        for target in self.targets:
            if not 0 < target < 1:
                raise ScenarioError(f"Reliability targets must lie in (0, 1), got {target}")

        validate_sf_table(self.sf_table)
        known = {row.sf for row in self.sf_table}
        for sf, rho in self.densities.items():
            if sf not in known:
                raise ScenarioError(f"Density given for SF{sf}, which is not in the SF table.")
            if not rho >= 0:
                raise ScenarioError(f"Density of SF{sf} must be non-negative, got {rho}")

        for row in self.sf_table:
            p = row.toa / self.period_s
            if p > self.duty_cycle_limit:
                logger.warning(
                    f"SF{row.sf}: activity factor {p:.6g} exceeds the duty-cycle limit {self.duty_cycle_limit}; "
                    f"replication will be capped at one copy."
                )

    # --- Derived quantities ---

    @property
    def sir_threshold_linear(self) -> float:
        """theta as used by the capture formulas; the stored value is dB unless ``theta_linear``."""
        if self.theta_linear:
            return self.sir_threshold_db
        return db_to_linear(self.sir_threshold_db)

    @property
    def tx_power_w(self) -> float:
        return db_to_linear(self.tx_power_dbm - 30.0)

    @property
    def area_m2(self) -> float:
        return math.pi * self.radius_m ** 2

    @property
    def sfs(self) -> Tuple[int, ...]:
        return tuple(row.sf for row in self.sf_table)

    def sf_params(self, sf: int) -> SfParams:
        for row in self.sf_table:
            if row.sf == sf:
                return row
        raise DomainError(f"SF{sf} is not in the scenario's SF table {self.sfs}")

    def energy_table(self, sf: int) -> EnergyStateTable:
        return default_energy_table(self.sf_params(sf), self.energy_states)

    def density(self, sf: int) -> float:
        self.sf_params(sf)
        return self.densities.get(sf, 0.0)

    def mean_devices(self, sf: int) -> float:
        """Average device count N_j = rho_j * pi R^2."""
        return devices_for_density(self, self.density(sf))

    def with_density(self, sf: int, density: float) -> "NetworkScenario":
        densities: Dict[int, float] = dict(self.densities)
        densities[sf] = density
        return replace(self, densities=densities)

    def with_devices(self, sf: int, n_devices: float) -> "NetworkScenario":
        return self.with_density(sf, density_for_devices(self, n_devices))


def density_for_devices(scenario: NetworkScenario, n_devices: float) -> float:
    """Density rho giving an average of ``n_devices`` devices in the disk."""
    if n_devices < 0:
        raise DomainError(f"Device count must be non-negative, got {n_devices}")
    return n_devices / scenario.area_m2


def devices_for_density(scenario: NetworkScenario, density: float) -> float:
    if density < 0:
        raise DomainError(f"Density must be non-negative, got {density}")
    return density * scenario.area_m2


def activity_factor(scenario: NetworkScenario, sf: int) -> float:
    """Fraction of the period one copy occupies the channel, p_j = t_j / P."""
    return scenario.sf_params(sf).toa / scenario.period_s


def max_copies(scenario: NetworkScenario, sf: int, hard_cap: Optional[int] = None) -> int:
    """
    Largest copy count allowed by the duty-cycle limit, bounded by ``hard_cap`` and never below 1.

    :param scenario: Scenario providing the period and duty-cycle limit.
    :param sf: Spreading factor.
    :param hard_cap: Search-space cap; defaults to the scenario's ``copy_cap``.
    :return: The number of copies.
    :raises DomainError: If hard_cap < 1.
    """
    cap = scenario.copy_cap if hard_cap is None else hard_cap
    if cap < 1:
        raise DomainError(f"hard_cap must be at least 1, got {cap}")
    p = activity_factor(scenario, sf)
    duty_copies = math.floor(scenario.duty_cycle_limit / p * (1.0 + _DUTY_FLOOR_SLACK))
    return max(1, min(cap, duty_copies))


# --- Scheme configurations ---

_SCHEME_PATTERN = re.compile(r"^\s*(DT|RT|CT|HT)\s*(?:\(\s*([0-9\s,]*)\))?\s*$", re.IGNORECASE)


@dataclass(frozen=True, order=True)
class SchemeConfig:
    """
    A replication configuration: ``m`` uncoded copies plus ``n`` distinct coded
    messages sent ``r`` times each, i.e. M = m + n*r copies per period.
    """
    kind: SchemeKind
    m: int = 1
    n: int = 0
    r: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise SchemeConfigError(f"Unknown scheme kind '{self.kind}', expected one of {SCHEME_KINDS}")
        for name in ("m", "r"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise SchemeConfigError(f"{self.kind}: {name} must be a positive integer, got {value!r}")
        if not isinstance(self.n, int) or self.n < 0:
            raise SchemeConfigError(f"{self.kind}: n must be a non-negative integer, got {self.n!r}")
        if self.kind == "DT" and (self.m, self.n, self.r) != (1, 0, 1):
            raise SchemeConfigError(f"DT requires m=1, n=0, r=1, got m={self.m}, n={self.n}, r={self.r}")
        if self.kind == "RT" and (self.n, self.r) != (0, 1):
            raise SchemeConfigError(f"RT requires n=0 (and r=1), got n={self.n}, r={self.r}")
        if self.kind == "CT" and (self.m, self.r) != (1, 1):
            raise SchemeConfigError(f"CT requires m=1 and r=1, got m={self.m}, r={self.r}")

    @property
    def copies(self) -> int:
        return self.m + self.n * self.r

    @property
    def label(self) -> str:
        if self.kind == "DT":
            return "DT"
        if self.kind == "RT":
            return f"RT({self.m})"
        if self.kind == "CT":
            return f"CT({self.n})"
        return f"HT({self.m},{self.n},{self.r})"

    def __str__(self):
        return self.label

    @classmethod
    def dt(cls) -> "SchemeConfig":
        return cls("DT")

    @classmethod
    def rt(cls, m: int) -> "SchemeConfig":
        return cls("RT", m=m)

    @classmethod
    def ct(cls, n: int) -> "SchemeConfig":
        return cls("CT", n=n)

    @classmethod
    def ht(cls, m: int, n: int, r: int) -> "SchemeConfig":
        return cls("HT", m=m, n=n, r=r)

    @classmethod
    def parse(cls, text: str) -> "SchemeConfig":
        """
        Parse ``DT``, ``RT(m)``, ``CT(n)`` or ``HT(m,n,r)``.

        :raises SchemeConfigError: If the text does not match one of the forms.
        """
        match = _SCHEME_PATTERN.match(text)
        if not match:
            raise SchemeConfigError(f"Cannot parse scheme '{text}'; expected DT, RT(m), CT(n) or HT(m,n,r)")
        kind = match.group(1).upper()
        raw_args = match.group(2)
        args = [int(a) for a in raw_args.split(",") if a.strip()] if raw_args else []
        expected = {"DT": 0, "RT": 1, "CT": 1, "HT": 3}[kind]
        if len(args) != expected:
            raise SchemeConfigError(f"{kind} takes {expected} argument(s), got '{text}'")
        if kind == "DT":
            return cls.dt()
        if kind == "RT":
            return cls.rt(args[0])
        if kind == "CT":
            return cls.ct(args[0])
        return cls.ht(*args)
