import json
import os
from typing import Any, Dict, List, Optional

from src import config
from src.logger.logger import MyLogger
from src.model.errors import ScenarioError
from src.model.params import EnergyState, NetworkScenario, SfParams

logger = MyLogger(config.LOG_NAME)

_SCALAR_FIELDS = (
    "radius_m", "ploss_exponent", "ploss_ref_db", "ref_dist_m", "tx_power_dbm", "bandwidth_hz",
    "noise_figure_db", "sir_threshold_db", "period_s", "duty_cycle_limit", "theta_linear",
    "battery_mah", "copy_cap",
)
_KNOWN_KEYS = set(_SCALAR_FIELDS) | {"densities", "targets", "sf_table", "energy_states"}


def _read_json(filepath: str) -> Dict[str, Any]:
    """
    :param filepath: Path to a scenario file.
    :return: The decoded top-level object.
    :raises ScenarioError: If the file is missing, not JSON, or not a JSON object.
    """
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except FileNotFoundError:
        raise ScenarioError(f"Scenario file not found: {filepath}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"Scenario file {filepath} is not valid JSON: {e}")

    if not isinstance(document, dict):
        raise ScenarioError(f"Scenario file {filepath} must contain a JSON object at top level.")
    return document


def _parse_sf_table(rows: List[Dict[str, Any]]) -> tuple:
    try:
        return tuple(
            SfParams(
                sf=int(row["sf"]),
                toa=float(row["toa_s"]),
                snr_threshold_db=float(row["snr_threshold_db"]),
                rx1w=float(row["rx1w_s"]),
                rx2w=float(row["rx2w_s"]),
            )
            for row in rows
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"Malformed sf_table row: {e}")


def _parse_energy_states(rows: List[Dict[str, Any]]) -> tuple:
    try:
        return tuple(
            EnergyState(
                index=int(row["index"]),
                name=str(row["name"]),
                duration=None if row.get("duration_s") is None else float(row["duration_s"]),
                current=float(row["current_a"]),
            )
            for row in rows
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(f"Malformed energy_states row: {e}")


def scenario_from_dict(document: Dict[str, Any], source: str = "<dict>") -> NetworkScenario:
    """
    Build a scenario from its JSON object form. Missing keys take the built-in
    defaults; unknown keys are logged and ignored.

    :param document: Decoded JSON object.
    :param source: Name used in log and error messages.
    :return: The validated scenario.
    :raises ScenarioError: On malformed values or violated invariants.
    """
    unknown = sorted(set(document) - _KNOWN_KEYS)
    if unknown:
        logger.warning(f"Ignoring unknown scenario keys in {source}: {unknown}")

    kwargs: Dict[str, Any] = {name: document[name] for name in _SCALAR_FIELDS if name in document}
    if "copy_cap" in kwargs:
        cap = kwargs["copy_cap"]
        if isinstance(cap, bool) or not (isinstance(cap, int) or (isinstance(cap, float) and cap.is_integer())):
            raise ScenarioError(f"copy_cap in {source} must be an integer, got {cap!r}")
        kwargs["copy_cap"] = int(cap)
    if "theta_linear" in kwargs and not isinstance(kwargs["theta_linear"], bool):
        raise ScenarioError(f"theta_linear in {source} must be true or false, got {kwargs['theta_linear']!r}")
    if "densities" in document:
        try:
            kwargs["densities"] = {int(sf): float(rho) for sf, rho in document["densities"].items()}
        except (AttributeError, TypeError, ValueError) as e:
            raise ScenarioError(f"densities in {source} must map SF to a number: {e}")
    if "targets" in document:
        targets = document["targets"]
        if isinstance(targets, (str, dict)) or not hasattr(targets, "__iter__"):
            raise ScenarioError(f"targets in {source} must be a list of numbers, got {targets!r}")
        try:
            kwargs["targets"] = tuple(float(t) for t in targets)
        except (TypeError, ValueError) as e:
            raise ScenarioError(f"targets in {source} must be a list of numbers: {e}")
    if "sf_table" in document:
        kwargs["sf_table"] = _parse_sf_table(document["sf_table"])
    if "energy_states" in document:
        kwargs["energy_states"] = _parse_energy_states(document["energy_states"])

    try:
        return NetworkScenario(**kwargs)
    except TypeError as e:
        raise ScenarioError(f"Invalid scenario in {source}: {e}")


def scenario_to_dict(scenario: NetworkScenario) -> Dict[str, Any]:
    """JSON object form of a scenario; ``scenario_from_dict`` inverts it exactly."""
    document: Dict[str, Any] = {name: getattr(scenario, name) for name in _SCALAR_FIELDS}
    document["densities"] = {str(sf): rho for sf, rho in sorted(scenario.densities.items())}
    document["targets"] = list(scenario.targets)
    document["sf_table"] = [
        {"sf": row.sf, "toa_s": row.toa, "snr_threshold_db": row.snr_threshold_db,
         "rx1w_s": row.rx1w, "rx2w_s": row.rx2w}
        for row in scenario.sf_table
    ]
    document["energy_states"] = [
        {"index": s.index, "name": s.name, "duration_s": s.duration, "current_a": s.current}
        for s in scenario.energy_states
    ]
    return document


def load_scenario(filepath: Optional[str] = None) -> NetworkScenario:
    """
    Load a scenario file, falling back to the built-in defaults when no path is given
    and the configured default file is absent.

    :param filepath: Path to the scenario JSON, or None for the configured default.
    :return: The validated scenario.
    """
    ACTION = "Load scenario"
    logger.start(ACTION)
    try:
        path = filepath or config.DEFAULT_SCENARIO_PATH
        if filepath is None and not os.path.isfile(path):
            logger.warning(f"No scenario file at {path}; using built-in defaults.")
            return NetworkScenario()
        scenario = scenario_from_dict(_read_json(path), source=os.path.basename(path))
        logger.info(f"Loaded {os.path.basename(path)}: R={scenario.radius_m} m, eta={scenario.ploss_exponent}, "
                    f"theta={scenario.sir_threshold_db} ({'linear' if scenario.theta_linear else 'dB'}), "
                    f"P={scenario.period_s} s")
        return scenario
    except ScenarioError as e:
        logger.error(f"Could not load scenario: {e}")
        raise
    finally:
        logger.close(ACTION)


def dump_scenario(scenario: NetworkScenario, filepath: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(filepath)), exist_ok=True)
    with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
        f.write("\n")

