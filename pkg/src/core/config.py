# src/core/config.py
"""
Core configuration settings for hierstab
Manages all system-wide configurations, numeric tolerances and caps
"""

from pathlib import Path
from typing import Dict
import logging
import os

from dotenv import load_dotenv

load_dotenv()

# Project structure configuration
PROJECT_ROOT = Path(__file__).parent.parent.parent
RESULTS_DIR = PROJECT_ROOT / "results"
LOG_DIR = PROJECT_ROOT / "logs"
SRC_DIR = PROJECT_ROOT / "src"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    # Accept "2**26" style caps as well as plain integers
    raw = raw.strip()
    if "**" in raw:
        base, exponent = raw.split("**", 1)
        return int(base) ** int(exponent)
    return int(raw)


# Enumeration caps
ENUMERATION_CONFIG = {
    "max_joint_states": _env_int("HIERSTAB_CAP", 2 ** 26),
    "max_range_size": 4096,       # largest output range for spectral problems
    "max_es_coordinates": 20,
}

# Numeric tolerances
TOLERANCES = {
    "probability_sum": 1e-12,
    "exact": 1e-9,                # equalities derived from exact arithmetic
    "user_table": 1e-6,           # user-supplied float tables
    "slice_constancy": 1e-10,
    "value_decimals": 12,         # rounding used when merging output values
    "variance_floor": 1e-15,
}

# Singular value / eigenvalue routines
SPECTRAL_CONFIG = {
    "dense_svd_max_support": 64,
    "power_tol": 1e-11,
    "max_sweeps": 10_000,
}

FOURIER_CONFIG = {
    "dense_max_n": 26,
}

# Monte Carlo estimators
MONTE_CARLO_CONFIG = {
    "default_samples": 100_000,
    "min_hierarchy_samples": 1_000,
    "block_size": 65_536,
    "confidence_z": 1.959963984540054,   # two-sided 95%
    "workers": 1,
    "progress": False,
}

PERCOLATION_CONFIG = {
    "exact_max_sites": 20,
    "default_p": 0.5,
}

# Analytic (non finite-support) components are certified on a grid
ANALYTIC_CONFIG = {
    "grid_points": 7,
    "domain": (0.0, 1.0),
}

CLI_CONFIG = {
    "default_seed": 0,
    "default_format": "json",
    "default_samples": 100_000,
    "output_dir": RESULTS_DIR,
}

# Logging configuration
LOGGING_CONFIG = {
    "level": os.getenv("HIERSTAB_LOG_LEVEL", "INFO"),
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "log_file": os.getenv("HIERSTAB_LOG_FILE"),
}

logger = logging.getLogger(__name__)
_logging_ready = False


def get_config() -> Dict:
    """
    Get complete configuration dictionary

    Returns:
        Dict: Complete configuration settings
    """
    return {
        "enumeration": ENUMERATION_CONFIG,
        "tolerances": TOLERANCES,
        "spectral": SPECTRAL_CONFIG,
        "fourier": FOURIER_CONFIG,
        "monte_carlo": MONTE_CARLO_CONFIG,
        "percolation": PERCOLATION_CONFIG,
        "analytic": ANALYTIC_CONFIG,
        "cli": CLI_CONFIG,
        "logging": LOGGING_CONFIG,
    }


def enumeration_cap() -> int:
    """Current cap on joint states, re-read so tests can patch the dictionary"""
    return int(ENUMERATION_CONFIG["max_joint_states"])


def validate_config() -> bool:
    """
    Validate configuration settings

    Returns:
        bool: True if configuration is valid
    """
    problems = []

    if enumeration_cap() < 4:
        problems.append(f"max_joint_states too small: {enumeration_cap()}")
    if MONTE_CARLO_CONFIG["block_size"] < 1:
        problems.append("block_size must be positive")
    if MONTE_CARLO_CONFIG["workers"] < 1:
        problems.append("workers must be at least 1")
    if not 0 < TOLERANCES["exact"] < 1e-3:
        problems.append(f"exact tolerance out of range: {TOLERANCES['exact']}")
    if SPECTRAL_CONFIG["max_sweeps"] < 1:
        problems.append("max_sweeps must be positive")
    if ANALYTIC_CONFIG["grid_points"] < 2:
        problems.append("analytic grid needs at least two points")
    if logging.getLevelName(str(LOGGING_CONFIG["level"]).upper()) not in range(0, 51):
        problems.append(f"unknown log level: {LOGGING_CONFIG['level']}")

    for problem in problems:
        logger.error("invalid configuration: %s", problem)

    if not problems:
        logger.debug("configuration valid")
    return not problems


def setup_logging(level: str = None) -> None:
    """
    Configure the root logger from LOGGING_CONFIG (idempotent)

    Args:
        level (str): Optional override of the configured level
    """
    global _logging_ready
    root = logging.getLogger()
    root.setLevel(str(level or LOGGING_CONFIG["level"]).upper())
    if _logging_ready:
        return

    formatter = logging.Formatter(LOGGING_CONFIG["format"])
    stream = logging.StreamHandler()   # stderr
    stream.setFormatter(formatter)
    root.addHandler(stream)

    if LOGGING_CONFIG.get("log_file"):
        log_path = Path(LOGGING_CONFIG["log_file"])
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    _logging_ready = True


if __name__ == "__main__":
    setup_logging()
    if validate_config():
        logger.info("configuration loaded: %d sections", len(get_config()))
        logger.info("project root: %s", PROJECT_ROOT)
    else:
        logger.error("configuration invalid")
