"""
Configuration for the refleqt workbench
========================================
Environment variables and default settings.
"""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

logger = logging.getLogger("refleqt.config")

# Load .env file if it exists
if os.path.exists(".env"):
    load_dotenv()


def get_env_var(var_name: str, default: Optional[str] = None, required: bool = False) -> Optional[str]:
    """
    Get an environment variable with optional default.

    Args:
        var_name: Name of the environment variable
        default: Default value if not set
        required: Whether the variable is required

    Returns:
        The value of the environment variable or default

    Raises:
        ValueError: If required variable is not set and no default provided
    """
    value = os.getenv(var_name, default)
    if required and not value:
        raise ValueError(f"{var_name} must be set in the environment or .env file")
    return value


def _int_setting(var_name: str, default: int) -> int:
    raw = get_env_var(var_name, default=str(default))
    try:
        return int(raw) if raw is not None else default
    except ValueError:
        raise ValueError(f"{var_name} must be an integer, got {raw!r}")


# Get the directory where this config file is located
CURRENT_DIR = Path(__file__).parent
ASSETS_DIR = CURRENT_DIR / "assets"

# Shipped base theory: arithmetic + coding profile with induction
STANDARD_THEORY_FILE = str(ASSETS_DIR / "s12_fragment.thy")

DEFAULT_MAX_CODE = 2**14
DEFAULT_TAUTOLOGY_ATOMS = 18
DEFAULT_SEED = 0
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def max_code() -> int:
    """Ceiling for exhaustive enumerations and bounded-quantifier evaluation."""
    return _int_setting("REFLEQT_MAX_CODE", DEFAULT_MAX_CODE)


def tautology_atom_limit() -> int:
    return _int_setting("REFLEQT_TAUTOLOGY_ATOMS", DEFAULT_TAUTOLOGY_ATOMS)


def default_seed() -> int:
    return _int_setting("REFLEQT_SEED", DEFAULT_SEED)


def log_level() -> str:
    return (get_env_var("REFLEQT_LOG_LEVEL", default="INFO") or "INFO").upper()


logger.debug(
    f"refleqt configuration: max_code={max_code()}, tautology_atoms={tautology_atom_limit()}, "
    f"standard theory={STANDARD_THEORY_FILE}"
)
