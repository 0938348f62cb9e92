"""Configuration module for splitkit"""

import os
from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return float(raw)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


# Numerical rank threshold (relative to the largest singular/eigen value)
RANK_TOL = _env_float("SPLITKIT_TOL", 1e-9)

# Worker pool
JOBS = max(1, _env_int("SPLITKIT_JOBS", 1))
SIM_CHUNK = max(1, _env_int("SPLITKIT_SIM_CHUNK", 4096))

# Logging
LOG_LEVEL = os.environ.get("SPLITKIT_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = os.environ.get("SPLITKIT_LOG_FORMAT", "json").lower()

# Statistical verdicts
DEFAULT_LEVEL = _env_float("SPLITKIT_LEVEL", 0.01)
DEFAULT_SIGMAS = _env_float("SPLITKIT_SIGMAS", 3.0)
EXACT_SPLIT_THRESHOLD = 1e-8

# Monte Carlo budgets
N_OUTER = _env_int("SPLITKIT_N_OUTER", 2000)
N_INNER = _env_int("SPLITKIT_N_INNER", 500)
N_DIRECT = _env_int("SPLITKIT_N_DIRECT", 100_000)
NUM_RESAMPLES = _env_int("SPLITKIT_NUM_RESAMPLES", 499)
MAX_DCOV_SAMPLES = _env_int("SPLITKIT_MAX_DCOV_SAMPLES", 1000)
MAX_ENERGY_SAMPLES = _env_int("SPLITKIT_MAX_ENERGY_SAMPLES", 1000)
N_BOOTSTRAP = _env_int("SPLITKIT_N_BOOTSTRAP", 200)

# Enumeration and optimizer budgets
ENUMERATION_BUDGET = _env_int("SPLITKIT_ENUMERATION_BUDGET", 1_000_000)
BRUTE_FORCE_MAX_ATOMS = 20
MARGIN_RESTARTS = _env_int("SPLITKIT_MARGIN_RESTARTS", 32)
MARGIN_ITERATIONS = _env_int("SPLITKIT_MARGIN_ITERATIONS", 500)

# Minimum sample counts for the statistical tests
MIN_SPLIT_SAMPLES = 1000
MIN_TAIL_SAMPLES = 10_000
