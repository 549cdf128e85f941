"""
Settings for the PressureDim tools.

Every tunable constant is read from the environment (or a local .env file) so a
run can be reproduced by committing the .env next to the spec file.

For the full list of settings and their defaults, see .env.example.
"""

from pathlib import Path
import os

from dotenv import load_dotenv

from PressureDim.errors import ConfigurationError

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


load_dotenv()


def _int(name, default):
    raw = os.getenv(name, str(default))
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from exc


def _float(name, default):
    raw = os.getenv(name, repr(default))
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{name} must be a number, got {raw!r}") from exc


def _exponent_window(name, default):
    raw = os.getenv(name, default)
    try:
        lo, hi = (int(part) for part in raw.split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"{name} must look like LO:HI, got {raw!r}") from exc
    return tuple(2.0 ** -k for k in range(lo, hi + 1))


# Enumeration budgets
WORD_BUDGET = _int('WORD_BUDGET', 10_000_000)

# Perron data / spectral radius
POWER_ITERATION_TOL = _float('POWER_ITERATION_TOL', 1e-14)
POWER_ITERATION_MAX_ITER = _int('POWER_ITERATION_MAX_ITER', 100_000)

# Root finding
ROOT_TOL = _float('ROOT_TOL', 1e-10)
SAMPLED_ROOT_TOL = _float('SAMPLED_ROOT_TOL', 1e-6)
MAX_BISECTION_STEPS = _int('MAX_BISECTION_STEPS', 60)
AFFINITY_BRACKET_TOL = _float('AFFINITY_BRACKET_TOL', 1e-6)

# Sampling
DEFAULT_SEED = _int('DEFAULT_SEED', 0)
DEFAULT_WORKERS = _int('DEFAULT_WORKERS', 1)
CHAOS_BURN_IN = _int('CHAOS_BURN_IN', 100)
REORTHONORMALIZE_EVERY = _int('REORTHONORMALIZE_EVERY', 20)

# Interval arithmetic for the skew products
INTERVAL_TOL = _float('INTERVAL_TOL', 1e-12)
SINGULARITY_RADIUS = _float('SINGULARITY_RADIUS', 1e-9)
ORBIT_TOUCH_RADIUS = _float('ORBIT_TOUCH_RADIUS', 1e-12)
TRANSITIVITY_LEVEL = _int('TRANSITIVITY_LEVEL', 3)
GIBBS_CHECK_LEVEL = _int('GIBBS_CHECK_LEVEL', 6)

# Box counting: dyadic scales 2^-LO ... 2^-HI
BOX_SCALES = _exponent_window('BOX_SCALE_EXPONENTS', '4:9')

# Artifacts
OUTPUT_DIR = Path(os.getenv('OUTPUT_DIR', 'artifacts'))


# Logging
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'PressureDim': {
            'handlers': ['stderr'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
