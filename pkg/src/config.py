from dataclasses import dataclass
import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv
from pythonjsonlogger import jsonlogger

load_dotenv()


@dataclass
class Config:
    RESULTS_DIR: str = os.getenv("LAB_RESULTS_DIR", "results")
    WORKERS: int = int(os.getenv("LAB_WORKERS", "1"))
    LOG_LEVEL: str = os.getenv("LAB_LOG_LEVEL", "INFO")
    LOG_JSON: bool = os.getenv("LAB_LOG_JSON", "false").lower() in ("1", "true", "yes")
    API_HOST: str = os.getenv("LAB_API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("LAB_API_PORT", "8000"))
    DEFAULT_SEED: int = 0xB1EF
    POPULATION_CAP: int = 10**8
    P_VALUE_FLOOR: float = 0.01


def configure_logging(level: str = "INFO", json_output: bool = False, stream: Optional[object] = None) -> None:
    """Install a single root handler, JSON formatted when requested."""
    handler = logging.StreamHandler(stream or sys.stderr)
    if json_output:
        handler.setFormatter(
            jsonlogger.JsonFormatter("%(asctime)s %(levelname)s %(name)s %(message)s")
        )
    else:
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level.upper())
