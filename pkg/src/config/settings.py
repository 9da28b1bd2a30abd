"""
Settings - runtime configuration loaded from the environment / .env

Keys (all optional):
    DIRAC_WWM_LOG_LEVEL        logging level of the CLI (default WARNING)
    DIRAC_WWM_DEFAULT_DT       evolve time step when --dt is omitted (default 0.001)
    DIRAC_WWM_OUTPUT_FORMAT    text | json | csv (default text)
    DIRAC_WWM_ON_M_TOLERANCE   |alpha z0| accepted by the integrator (default 1e-12)
    DIRAC_WWM_PROJECTION_WARN  warn when projecting the initial point moves it more (default 1e-9)
    DIRAC_WWM_SHOW_PROGRESS    true | false, tqdm bars on stderr (default false)
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

from dirac_wwm.errors import ConfigurationError

OUTPUT_FORMATS = ('text', 'json', 'csv')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def _positive_float(key: str, default: str) -> float:
    raw = os.getenv(key, default)
    try:
        value = float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}={raw!r} is not a number") from None
    if not value > 0:
        raise ConfigurationError(f"{key}={raw!r} must be positive")
    return value


@dataclass(frozen=True)
class Settings:
    log_level: str = 'WARNING'
    default_dt: float = 0.001
    output_format: str = 'text'
    on_m_tolerance: float = 1e-12
    projection_warn: float = 1e-9
    show_progress: bool = False

    @property
    def log_level_value(self) -> int:
        return getattr(logging, self.log_level)

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "Settings":
        """
        Load .env (or env_file) into the environment and read the settings.

        Raises:
            ConfigurationError: unknown level or format, non-positive numbers
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        log_level = os.getenv('DIRAC_WWM_LOG_LEVEL', 'WARNING').upper()
        if log_level not in LOG_LEVELS:
            raise ConfigurationError(f"DIRAC_WWM_LOG_LEVEL={log_level!r} is not one of {', '.join(LOG_LEVELS)}")
        output_format = os.getenv('DIRAC_WWM_OUTPUT_FORMAT', 'text').lower()
        if output_format not in OUTPUT_FORMATS:
            raise ConfigurationError(f"DIRAC_WWM_OUTPUT_FORMAT={output_format!r} is not one of {', '.join(OUTPUT_FORMATS)}")

        return cls(
            log_level=log_level,
            default_dt=_positive_float('DIRAC_WWM_DEFAULT_DT', '0.001'),
            output_format=output_format,
            on_m_tolerance=_positive_float('DIRAC_WWM_ON_M_TOLERANCE', '1e-12'),
            projection_warn=_positive_float('DIRAC_WWM_PROJECTION_WARN', '1e-9'),
            show_progress=os.getenv('DIRAC_WWM_SHOW_PROGRESS', 'false').lower() == 'true',
        )
