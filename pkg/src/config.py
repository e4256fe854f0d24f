import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file (if it exists)
load_dotenv()


def _float_env(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be a number, got '{raw}'")


def _int_env(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got '{raw}'")


# --- Path Configurations ---
_BASE_DIR = os.path.dirname(os.path.abspath(__file__))
_PROJECT_DIR = os.path.dirname(_BASE_DIR)
DATA_DIR = os.getenv("DATA_DIR", os.path.join(_PROJECT_DIR, "data"))
DEFAULT_SCENARIO_PATH = os.getenv("DEFAULT_SCENARIO_PATH", os.path.join(DATA_DIR, "scenario_default.json"))
OUTPUT_DIR = os.getenv("OUTPUT_DIR", os.path.join(_PROJECT_DIR, "results"))
LOGS_DIR = os.getenv("LOGS_DIR", os.path.join(_PROJECT_DIR, "logs"))

# --- Logging Configuration ---
LOG_LEVEL = _int_env("LOG_LEVEL", str(logging.INFO))
LOG_NAME = os.getenv("LOG_NAME", "LoRaReplication")

# --- Run Defaults ---
DEFAULT_SEED = _int_env("DEFAULT_SEED", "20240601")
DEFAULT_THREADS = _int_env("DEFAULT_THREADS", "1")
DEFAULT_COPY_CAP = _int_env("DEFAULT_COPY_CAP", "10")
DEFAULT_BATTERY_MAH = _float_env("DEFAULT_BATTERY_MAH", "2400")
DEFAULT_TARGETS = (0.99, 0.999)

# --- Numerical Tolerances ---
HYP2F1_SERIES_SWITCH = _float_env("HYP2F1_SERIES_SWITCH", "0.5")
HYP2F1_INVERSION_SWITCH = _float_env("HYP2F1_INVERSION_SWITCH", "4.0")
HYP2F1_RELATIVE_TOLERANCE = _float_env("HYP2F1_RELATIVE_TOLERANCE", "1e-14")
HYP2F1_MAX_TERMS = _int_env("HYP2F1_MAX_TERMS", "10000")
BISECTION_TOLERANCE = _float_env("BISECTION_TOLERANCE", "1e-12")
PROBABILITY_CLAMP_TOLERANCE = _float_env("PROBABILITY_CLAMP_TOLERANCE", "1e-15")
NEAR_TIE_FRACTION = _float_env("NEAR_TIE_FRACTION", "0.005")

# --- Verification / Monte Carlo ---
MC_BLOCK_TRIALS = _int_env("MC_BLOCK_TRIALS", "65536")
EXACT_ENUMERATION_MAX_CODED = _int_env("EXACT_ENUMERATION_MAX_CODED", "3")
JOINT_ENUMERATION_MAX_BITS = _int_env("JOINT_ENUMERATION_MAX_BITS", "25")
MIN_ORACLE_MC_TRIALS = _int_env("MIN_ORACLE_MC_TRIALS", "10000")

# --- Basic Validation ---
if not 0 < HYP2F1_SERIES_SWITCH < 1 < HYP2F1_INVERSION_SWITCH:
    raise ValueError(
        "HYP2F1 switches must satisfy 0 < HYP2F1_SERIES_SWITCH < 1 < HYP2F1_INVERSION_SWITCH "
        f"(got {HYP2F1_SERIES_SWITCH}, {HYP2F1_INVERSION_SWITCH})"
    )

if DEFAULT_THREADS < 1 or MC_BLOCK_TRIALS < 1:
    raise ValueError("DEFAULT_THREADS and MC_BLOCK_TRIALS must be positive.")

if not os.path.isfile(DEFAULT_SCENARIO_PATH):
    logging.warning(f"Default scenario file '{DEFAULT_SCENARIO_PATH}' not found. Built-in defaults will be used.")
