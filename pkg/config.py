#!/usr/bin/env python3
"""
cinf-lift - Configuration and Logging

Settings come from CINF_LIFT_* environment variables, optionally loaded
from a .env file. Command line flags override them.
"""

import os
import logging
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv
from rich.logging import RichHandler

from errors import InputError

PIVOT_STRATEGIES = ("sparse", "first")


@dataclass(frozen=True)
class Settings:
    """Runtime settings for commands and the linear algebra layer."""
    log_level: str = "WARNING"
    pivot: str = "sparse"
    default_order: int = 6
    seed: int = 0
    report_indent: int = 2

    def override(self, **changes) -> "Settings":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}")


def load_settings(env_file: Optional[str] = None) -> Settings:
    """
    Read settings from the environment.

    Args:
        env_file: Optional path of a .env file; the default search applies otherwise

    Returns:
        Validated Settings
    """
    load_dotenv(env_file)

    level = os.getenv("CINF_LIFT_LOG_LEVEL", "WARNING").upper()
    if not isinstance(logging.getLevelName(level), int):
        raise InputError(f"CINF_LIFT_LOG_LEVEL: unknown level {level!r}")

    pivot = os.getenv("CINF_LIFT_PIVOT", "sparse").lower()
    if pivot not in PIVOT_STRATEGIES:
        raise InputError(f"CINF_LIFT_PIVOT must be one of {PIVOT_STRATEGIES}, got {pivot!r}")

    order = _int_env("CINF_LIFT_DEFAULT_ORDER", 6)
    if order < 3:
        raise InputError("CINF_LIFT_DEFAULT_ORDER must be at least 3")

    return Settings(
        log_level=level,
        pivot=pivot,
        default_order=order,
        seed=_int_env("CINF_LIFT_SEED", 0),
        report_indent=_int_env("CINF_LIFT_REPORT_INDENT", 2),
    )


def setup_logging(level: str = "WARNING") -> None:
    """Install a single rich handler on the root logger."""
    root = logging.getLogger()
    root.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(show_path=False, markup=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        root.addHandler(handler)


_active = Settings()


def active_settings() -> Settings:
    return _active


def activate(settings: Settings) -> None:
    """Make `settings` the process-wide defaults (used by the CLI)."""
    global _active
    _active = settings
