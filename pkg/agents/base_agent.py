"""Base agent class: logging setup, env config and provider fallbacks."""

import logging
import os
from typing import Callable, Optional, TypeVar

from dotenv import load_dotenv

from data_store.errors import HarnessIOError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

T = TypeVar("T")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def resolve_log_level(level: Optional[str] = None) -> str:
    """LOG_LEVEL from the argument or env, forced to DEBUG when DEBUG=true."""
    if os.getenv("DEBUG", "false").lower() == "true":
        return "DEBUG"
    return (level or os.getenv("LOG_LEVEL", "INFO")).upper()


def configure_logging(level: Optional[str] = None) -> str:
    """Configure the root logger once and return the level in use."""
    log_level = resolve_log_level(level)
    logging.basicConfig(level=getattr(logging, log_level, logging.INFO), format=LOG_FORMAT)
    return log_level


class BaseAgent:
    """Base class for the planning agents."""

    def __init__(self, name: str):
        """Initialize the base agent."""
        self.name = name
        self.setup_logging()

    def setup_logging(self) -> None:
        """Setup logging for the agent."""
        log_level = configure_logging()
        logger.debug(f"Agent '{self.name}' initialized with log level: {log_level}")

    def log_info(self, message: str) -> None:
        """Log an info message."""
        logger.info(f"[{self.name}] {message}")

    def log_error(self, message: str) -> None:
        """Log an error message."""
        logger.error(f"[{self.name}] {message}")

    def log_warning(self, message: str) -> None:
        """Log a warning message."""
        logger.warning(f"[{self.name}] {message}")

    def with_fallback(
        self, stage: str, primary: Callable[[], T], fallback: Callable[[], T]
    ) -> T:
        """Run primary; on provider failure or a malformed answer, run fallback."""
        try:
            return primary()
        except (HarnessIOError, ValueError, KeyError, TypeError) as e:
            self.log_warning(f"{stage}: provider failed ({e}); using deterministic fallback")
            return fallback()
