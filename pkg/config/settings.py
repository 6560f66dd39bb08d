"""Central application configuration"""
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

_PROJECT_ROOT = Path(__file__).resolve().parent.parent
_DOTENV_PATH = _PROJECT_ROOT / ".env"
_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

load_dotenv(dotenv_path=_DOTENV_PATH, override=False)


class Config:
    """Holds toolkit configuration values loaded from .env or the process environment."""

    SMOOTHNESS_ORDER: str | int | None = os.getenv("SMOOTHNESS_ORDER", "3")
    LOG_LEVEL: str | None = os.getenv("LOG_LEVEL", "WARNING")

    MIN_SMOOTHNESS_ORDER: int = 2

    @classmethod
    def validate(cls) -> None:
        """Validate variables & finalize typed values."""
        problems = []
        try:
            order = int(cls.SMOOTHNESS_ORDER)
        except (TypeError, ValueError):
            order = None
            problems.append(f"SMOOTHNESS_ORDER must be an integer, got {cls.SMOOTHNESS_ORDER!r}")
        if order is not None and order < cls.MIN_SMOOTHNESS_ORDER:
            problems.append(f"SMOOTHNESS_ORDER must be at least {cls.MIN_SMOOTHNESS_ORDER}, got {order}")

        level = str(cls.LOG_LEVEL or "").upper()
        if level not in _LEVELS:
            problems.append(f"LOG_LEVEL must be a logging level name, got {cls.LOG_LEVEL!r}")

        if problems:
            raise ValueError(f"Invalid configuration in .env: {'; '.join(problems)}")

        cls.SMOOTHNESS_ORDER = order
        cls.LOG_LEVEL = level

    @classmethod
    def smoothness_order(cls, override: Optional[int] = None) -> int:
        """
        Resolve the C^K order used for new forms.

        Args:
            override: Explicit order (the CLI --K flag); wins over the environment.

        Returns:
            Validated smoothness order.
        """
        if override is not None:
            if override < cls.MIN_SMOOTHNESS_ORDER:
                raise ValueError(f"smoothness order must be at least {cls.MIN_SMOOTHNESS_ORDER}, got {override}")
            return override
        cls.validate()
        return int(cls.SMOOTHNESS_ORDER)
